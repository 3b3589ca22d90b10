"""Parsing and validation of exported grid CSV files."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class GridFile:
    """A dense 2-D grid of partition values.

    x1, x2 are the sorted axis coordinates; h has shape
    (len(x1), len(x2), k) with the partition columns summing to 1 at every
    pixel; classes holds the predicted class per pixel.
    """

    x1: np.ndarray
    x2: np.ndarray
    h: np.ndarray
    classes: np.ndarray

    @property
    def k(self) -> int:
        return self.h.shape[2]

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """imshow extent (x1_min, x1_max, x2_min, x2_max)."""
        return (float(self.x1[0]), float(self.x1[-1]),
                float(self.x2[0]), float(self.x2[-1]))


def load_grid(path: str) -> GridFile:
    """Parse a grid CSV; validates columns and per-row partition sums."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty grid file")
        rows = [r for r in reader if r]
    h_cols = [c for c in header if c.startswith("h_")]
    expected = ["x1", "x2", *[f"h_{i + 1}" for i in range(len(h_cols))], "class"]
    if header != expected or not h_cols:
        raise ValueError(f"{path}: expected columns x1,x2,h_1..h_k,class, got {header}")
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValueError(f"{path}: malformed rows")
    xy = data[:, :2]
    h_flat = data[:, 2:-1]
    cls_flat = data[:, -1].astype(int)
    bad = np.max(np.abs(h_flat.sum(axis=1) - 1.0))
    if bad > SUM_TOLERANCE:
        raise ValueError(f"{path}: partition columns sum to 1 ± {SUM_TOLERANCE}, "
                         f"worst deviation {bad:.2e}")
    x1, i1 = np.unique(xy[:, 0], return_inverse=True)
    x2, i2 = np.unique(xy[:, 1], return_inverse=True)
    if len(x1) * len(x2) != len(data):
        raise ValueError(f"{path}: points do not form a dense rectangular grid")
    h = np.full((len(x1), len(x2), h_flat.shape[1]), np.nan)
    classes = np.zeros((len(x1), len(x2)), dtype=int)
    h[i1, i2] = h_flat
    classes[i1, i2] = cls_flat
    if np.isnan(h).any():
        raise ValueError(f"{path}: duplicate or missing grid points")
    return GridFile(x1=x1, x2=x2, h=h, classes=classes)
