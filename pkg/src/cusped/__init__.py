"""Exact computations for cusp cross-sections of arithmetic orbifolds."""

__version__ = "0.1.0"
