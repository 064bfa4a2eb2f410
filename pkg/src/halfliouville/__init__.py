"""Numerical toolkit for the half-Laplacian Liouville equation on the circle and the line."""
__version__ = "0.1.0"
