"""Surface pencils with a common line of curvature in Minkowski 3-space."""

__version__ = "0.1.0"
