"""Core numerics: time functions, Cameron-Martin space, paths, functionals."""
