"""Numerical kernel for twisted and mixed gauge geometry on coordinate charts."""

__version__ = "0.1.0"
