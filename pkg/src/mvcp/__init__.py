"""Exact simulation and verification tools for the multi-virus contact process."""
__version__ = "0.1.0"
