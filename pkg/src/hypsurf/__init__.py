"""Hyperbolic surfaces, short geodesic loops and injectivity-radius tools."""

__version__ = "0.1.0"
