"""Batch renderer for the sharpfid diagnostic figure tables.

Consumes the CSV tables written by ``sharpfid figure N --out DIR`` and
produces one PNG or SVG image per figure.  No statistic is recomputed here;
the tables are the single source of truth.
"""

from .errors import ManifestError, RenderError
from .manifest import CsvLayer, FigureManifest, build_manifest, load_table
from .render import compose, render

__version__ = "0.1.0"

__all__ = [
    "CsvLayer",
    "FigureManifest",
    "ManifestError",
    "RenderError",
    "build_manifest",
    "compose",
    "load_table",
    "render",
]
