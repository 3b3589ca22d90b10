"""Image rendering from loaded grid files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .gridfile import GridFile, load_grid

# Diverging blue <-> red with midpoint 0.5: blue = 1, red = 0.
BOUNDARY_CMAP = "RdBu"
HEATMAP_CMAP = "viridis"


def _grid(grid: GridFile | str) -> GridFile:
    return grid if isinstance(grid, GridFile) else load_grid(grid)


def render_boundary(grid: GridFile | str, out_path: str, title: str | None = None):
    """Background colored by h_1 with a black contour at h_1 = 0.5.

    A grid where h_1 never crosses 0.5 renders with a blank contour.
    Returns the saved figure.
    """
    grid = _grid(grid)
    h1 = grid.h[:, :, 0]
    fig, ax = plt.subplots(figsize=(5, 4.2))
    im = ax.imshow(h1.T, origin="lower", extent=grid.extent, aspect="auto",
                   cmap=BOUNDARY_CMAP, vmin=0.0, vmax=1.0)
    if h1.min() < 0.5 < h1.max():
        ax.contour(grid.x1, grid.x2, h1.T, levels=[0.5],
                   colors="black", linewidths=1.5)
    fig.colorbar(im, ax=ax, label="$h_1(x)$")
    ax.set_xlabel("$x_1$")
    ax.set_ylabel("$x_2$")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return fig


def render_partitions(grid: GridFile | str, out_path: str,
                      title: str | None = None):
    """Side-by-side heatmaps of every partition, fixed color range [0, 1].

    For k = 2 the two panels are pixelwise complementary by construction.
    Returns the saved figure.
    """
    grid = _grid(grid)
    k = grid.k
    fig, axes = plt.subplots(1, k, figsize=(3.4 * k, 3.2),
                             sharex=True, sharey=True, squeeze=False)
    im = None
    for i, ax in enumerate(axes[0]):
        im = ax.imshow(grid.h[:, :, i].T, origin="lower", extent=grid.extent,
                       aspect="auto", cmap=HEATMAP_CMAP, vmin=0.0, vmax=1.0)
        ax.set_title(f"$h_{{{i + 1}}}(x)$")
        ax.set_xlabel("$x_1$")
    axes[0, 0].set_ylabel("$x_2$")
    fig.colorbar(im, ax=list(axes[0]), fraction=0.03, pad=0.02)
    if title:
        fig.suptitle(title)
    fig.savefig(out_path)
    plt.close(fig)
    return fig
