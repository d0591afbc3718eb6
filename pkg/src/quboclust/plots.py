"""Figure rendering for the report paths (headless Agg backend).

Benchmarks write these PNGs next to their CSV/JSON output: a scatter of each
2-D assignment and, for sweeps, the solution-quality trace against the
decomposition round budget.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .model import Dataset  # noqa: E402


def save_assignment_figure(path: str | Path, data: Dataset, labels: np.ndarray,
                           title: str = "", centroids: np.ndarray | None = None) -> bool:
    """Scatter of a 2-D dataset colored by cluster label.

    Returns False (and writes nothing) for non-2-D data.
    """
    if data.dims != 2:
        return False
    fig, ax = plt.subplots(figsize=(6, 5))
    ax.scatter(data.points[:, 0], data.points[:, 1], c=labels,
               cmap="tab10", s=18, edgecolors="none")
    if centroids is not None:
        ax.scatter(centroids[:, 0], centroids[:, 1], marker="x", c="black", s=80)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return True


def save_sweep_figure(path: str | Path, nrepeats: list[int], values: list[float],
                      reference: float | None = None, ylabel: str = "inertia",
                      title: str = "") -> None:
    """Quality vs. decomposition round budget, with an optional k-means
    reference level drawn as a dashed line."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(nrepeats, values, "o-", color="tab:red", label="one-hot (decomposition)")
    if reference is not None:
        ax.axhline(reference, linestyle="--", color="tab:blue", label="k-means")
    ax.set_xlabel("nrepeat")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
