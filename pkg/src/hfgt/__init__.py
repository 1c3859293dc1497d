"""Hetero-functional graph construction and analysis."""
__version__ = "0.1.0"
