"""Geometry and Dirac operators extracted from a 2x2 first-order operator."""

__version__ = "0.1.0"
