"""Reverse triangle inequalities on finite-dimensional normed spaces."""
__version__ = "0.1.0"
