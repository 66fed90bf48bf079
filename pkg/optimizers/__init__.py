# Optimizers package
