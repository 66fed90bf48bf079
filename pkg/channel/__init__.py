# Channel package
