# Optimization building blocks
