"""Green's functions, random graphs and Gaussian waves on trees of finite cone type."""

__version__ = "0.1.0"
