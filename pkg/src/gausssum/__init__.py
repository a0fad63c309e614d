"""Quadratic exponential sums by exact renormalization."""

__version__ = "0.1.0"
