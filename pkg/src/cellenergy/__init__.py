"""Energy consumption of an isolated cellular base station under Poisson users."""

__version__ = "0.1.0"
