"""Exact computations with monomial perfectoid towers and their tilts."""

__version__ = "0.1.0"
