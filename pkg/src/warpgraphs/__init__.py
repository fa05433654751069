"""Numerical geometry of constant mean curvature vertical graphs in warped products."""

__version__ = "0.1.0"
