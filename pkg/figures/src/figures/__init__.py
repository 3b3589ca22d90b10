"""Rendering for exported partition grids and metrics.

Consumes only the file formats written by the `punn` CLI — dense grid CSVs
(columns x1, x2, h_1..h_k, class) and metrics JSONL records — and renders
decision-boundary images, partition heatmap panels, and markdown result
tables. Never touches model internals.
"""

from .gridfile import GridFile, load_grid
from .render import render_boundary, render_partitions
from .metrics_table import render_metrics_table

__all__ = [
    "GridFile",
    "load_grid",
    "render_boundary",
    "render_partitions",
    "render_metrics_table",
]
