"""aerobot: perception and control toolkit for aerial inspection robots."""

from . import errors, flight, fuzzy, neural, raster, sidewalk, vision

__version__ = "0.1.0"

__all__ = ["errors", "flight", "fuzzy", "neural", "raster", "sidewalk", "vision"]
