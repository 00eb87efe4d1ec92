"""Figure rendering for intenttrack CSV/JSON outputs.

Reads the tracker's file formats (per-step track records, measurement
series, truth metadata, query series) and renders the standard figure
kinds deterministically: same inputs, byte-identical image.
"""

from __future__ import annotations

from .data import SchemaError, read_columns, read_queries, read_truth
from .render import FIGURE_KINDS, PlotSpec, render

__version__ = "0.1.0"

__all__ = [
    "FIGURE_KINDS",
    "PlotSpec",
    "SchemaError",
    "read_columns",
    "read_queries",
    "read_truth",
    "render",
]
