"""Quantumness of correlations for fermionic mode systems."""

__version__ = "0.1.0"
