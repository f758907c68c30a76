"""Numerical verification of natural Norden structures on tangent bundles of space forms."""

__version__ = "0.1.0"
