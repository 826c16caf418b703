"""Matplotlib renderings written next to the delimited outputs.

Figures are a presentation layer only: nothing here feeds back into the
numeric pipeline, and all report/table files stay plain text.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_dimension_figure",
    "save_refinement_figure",
    "save_field_figure",
    "save_disk_figure",
]


def save_dimension_figure(estimate, path) -> Path:
    """log N against log k with the fitted upper/lower slopes."""
    ks = np.array([row[0] for row in estimate.table])
    nmax = np.array([row[1] for row in estimate.table])
    nmin = np.array([row[2] for row in estimate.table])
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(np.log(ks), np.log(nmax), "o-", label=f"max, slope {estimate.upper:.4f}")
    ax.plot(np.log(ks), np.log(nmin), "s--", label=f"min, slope {estimate.lower:.4f}")
    ax.set_xlabel("log k")
    ax.set_ylabel("log N(x, R, k)")
    ax.legend(frameon=False)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def save_refinement_figure(reports, path) -> Path:
    """Empirical constants across refinement stages, one line per check."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    for rep in reports:
        if not rep.refinement:
            continue
        labels = [lbl for lbl, _ in rep.refinement]
        values = [v for _, v in rep.refinement]
        ax.plot(range(len(values)), values, "o-", label=rep.name)
        ax.set_xticks(range(len(values)))
        ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel("sampled constant C")
    ax.set_yscale("log")
    ax.legend(frameon=False, fontsize=7)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def save_field_figure(grid, path) -> Path:
    """Line plot (1-d grids) or heat map (2-d grids) of the field values."""
    spec = grid.spec
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    if spec.n == 1:
        xs = spec.origin[0] + spec.spacing[0] * np.arange(spec.counts[0])
        ax.plot(xs, grid.values, lw=1.0)
        if grid.on_set is not None and grid.on_set.any():
            ax.plot(xs[grid.on_set], grid.values[grid.on_set], "k.", ms=3, label="on set")
            ax.legend(frameon=False)
        ax.set_xlabel("x")
        ax.set_ylabel("g(x)")
    elif spec.n == 2:
        im = ax.imshow(grid.values.T, origin="lower", aspect="auto")
        fig.colorbar(im, ax=ax)
    else:
        raise ValueError("field figures support 1-d and 2-d grids only")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out


def save_disk_figure(radii, angles, values, path) -> Path:
    """Polar heat map of |values| on the unit disk."""
    rr, tt = np.meshgrid(radii, angles, indexing="ij")
    fig = plt.figure(figsize=(4.6, 4.0))
    ax = fig.add_subplot(projection="polar")
    pc = ax.pcolormesh(tt, rr, np.abs(values), shading="auto")
    fig.colorbar(pc, ax=ax, shrink=0.8)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
