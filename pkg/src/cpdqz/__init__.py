"""Algebraic canonical polyadic decomposition by QZ triangularization."""
__version__ = "0.1.0"
