"""Numerical checks for large positive Hecke eigenvalues on GL(2)."""

__version__ = "0.1.0"
