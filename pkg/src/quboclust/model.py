"""Core problem and solution types plus exact energy evaluation.

Everything here is immutable after construction and safe to share across
concurrent solver runs; energy evaluation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError

Metric = str  # "euclidean" | "squared_euclidean"

METRICS = ("euclidean", "squared_euclidean")


@dataclass(frozen=True, eq=False)
class Dataset:
    """N points in p dimensions, optionally with generator labels."""

    points: np.ndarray
    true_labels: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise DimensionError(f"points must be a non-empty N×p matrix, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DomainError("points contain non-finite coordinates")
        object.__setattr__(self, "points", pts)
        if self.true_labels is not None:
            labels = np.asarray(self.true_labels, dtype=np.int64)
            if labels.shape != (pts.shape[0],):
                raise DimensionError(
                    f"true_labels has length {labels.shape}, expected ({pts.shape[0]},)"
                )
            object.__setattr__(self, "true_labels", labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dims(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric pairwise dissimilarities with zero diagonal.

    ``d_max`` records the maximum entry before normalization; when
    ``normalized`` the entries were divided by it, so the max entry is
    exactly 1 (unless all distances are zero, in which case normalization
    is skipped and ``normalized`` stays False).
    """

    n: int
    d: np.ndarray
    metric_tag: Metric = "squared_euclidean"
    normalized: bool = False
    d_max: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        if d.shape != (self.n, self.n):
            raise DimensionError(f"d must be {self.n}×{self.n}, got {d.shape}")
        if not np.all(np.isfinite(d)):
            raise DomainError("distance matrix contains non-finite entries")
        if np.any(d < 0):
            raise DomainError("distance matrix contains negative entries")
        if not np.array_equal(d, d.T):
            raise DomainError("distance matrix is not symmetric")
        if np.any(np.diag(d) != 0):
            raise DomainError("distance matrix has a nonzero diagonal")
        object.__setattr__(self, "d", d)

    @property
    def max_entry(self) -> float:
        """Largest dissimilarity in the stored (possibly normalized) matrix."""
        return float(self.d.max()) if self.n > 1 else 0.0


def distance_matrix(data: Dataset, metric: Metric = "squared_euclidean",
                    normalize: bool = False) -> DistanceMatrix:
    """Pairwise dissimilarities for a dataset.

    Args:
        data: input points.
        metric: "euclidean" or "squared_euclidean".
        normalize: divide all entries by the maximum so they lie in [0, 1];
            skipped (with ``normalized=False``) when all distances are zero.
    """
    if metric not in METRICS:
        raise DomainError(f"unknown metric {metric!r}; expected one of {METRICS}")
    x = data.points
    sq = np.sum(x * x, axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    d = np.minimum(d, d.T)  # enforce exact symmetry against rounding
    if metric == "euclidean":
        np.sqrt(d, out=d)
    d_max = float(d.max()) if data.n > 1 else 0.0
    did_normalize = bool(normalize and d_max > 0.0)
    if did_normalize:
        d = d / d_max
    return DistanceMatrix(n=data.n, d=d, metric_tag=metric,
                          normalized=did_normalize, d_max=d_max)


def _check_quadratic_keys(quadratic: dict[tuple[int, int], float], n_vars: int) -> None:
    for i, j in quadratic:
        if not (0 <= i < j < n_vars):
            raise DimensionError(
                f"quadratic key ({i},{j}) must satisfy 0 <= i < j < {n_vars}"
            )


@dataclass(frozen=True, eq=False)
class QuboProblem:
    """Sparse quadratic binary energy: offset + Σ linear[i]·q_i + Σ_{i<j} quad[i,j]·q_i·q_j."""

    n_vars: int
    linear: np.ndarray
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0
    var_labels: tuple[tuple[int, int], ...] | None = None  # (point, cluster) per variable

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=np.float64)
        if lin.shape != (self.n_vars,):
            raise DimensionError(f"linear must have length {self.n_vars}, got {lin.shape}")
        object.__setattr__(self, "linear", lin)
        _check_quadratic_keys(self.quadratic, self.n_vars)
        if self.var_labels is not None and len(self.var_labels) != self.n_vars:
            raise DimensionError("var_labels must have one entry per variable")

    @cached_property
    def _terms(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Quadratic terms as parallel (i, j, coeff) arrays, sorted by key."""
        items = sorted(self.quadratic.items())
        i = np.array([k[0] for k, _ in items], dtype=np.int64)
        j = np.array([k[1] for k, _ in items], dtype=np.int64)
        c = np.array([v for _, v in items], dtype=np.float64)
        return i, j, c


@dataclass(frozen=True, eq=False)
class IsingProblem:
    """Sparse spin energy: offset + Σ h_i·s_i + Σ_{i<j} J[i,j]·s_i·s_j, s ∈ {−1,+1}."""

    n_vars: int
    h: np.ndarray
    J: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.float64)
        if h.shape != (self.n_vars,):
            raise DimensionError(f"h must have length {self.n_vars}, got {h.shape}")
        object.__setattr__(self, "h", h)
        _check_quadratic_keys(self.J, self.n_vars)

    @cached_property
    def _terms(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        items = sorted(self.J.items())
        i = np.array([k[0] for k, _ in items], dtype=np.int64)
        j = np.array([k[1] for k, _ in items], dtype=np.int64)
        c = np.array([v for _, v in items], dtype=np.float64)
        return i, j, c


def _as_state(state: Sequence[int] | np.ndarray, n_vars: int, allowed: tuple[int, int],
              what: str) -> np.ndarray:
    s = np.asarray(state)
    if s.shape != (n_vars,):
        raise DimensionError(f"state has shape {s.shape}, expected ({n_vars},)")
    if not np.all(np.isin(s, allowed)):
        raise DomainError(f"{what} state entries must be in {set(allowed)}")
    return s.astype(np.float64)


def qubo_energy(problem: QuboProblem, state: Sequence[int] | np.ndarray) -> float:
    """Exact energy of a binary state under a QUBO problem."""
    q = _as_state(state, problem.n_vars, (0, 1), "binary")
    i, j, c = problem._terms
    e = problem.offset + float(problem.linear @ q)
    if c.size:
        e += float(np.sum(c * q[i] * q[j]))
    return e


def ising_energy(problem: IsingProblem, state: Sequence[int] | np.ndarray) -> float:
    """Exact energy of a spin state under an Ising problem."""
    s = _as_state(state, problem.n_vars, (-1, 1), "spin")
    i, j, c = problem._terms
    e = problem.offset + float(problem.h @ s)
    if c.size:
        e += float(np.sum(c * s[i] * s[j]))
    return e


@dataclass(frozen=True, eq=False)
class ClusterAssignment:
    """Point → cluster map. Empty clusters are representable; see ``used_clusters``."""

    labels: np.ndarray
    k: int
    source_tag: str = ""

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size < 1:
            raise DimensionError("labels must be a non-empty vector")
        if labels.size and (labels.min() < 0 or labels.max() >= self.k):
            raise DomainError(f"labels must lie in [0, {self.k})")
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.labels.size

    @property
    def used_clusters(self) -> np.ndarray:
        return np.unique(self.labels)

    @property
    def has_empty_clusters(self) -> bool:
        return self.used_clusters.size < self.k


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Result of one solver invocation.

    ``best_energy`` always equals ``min(sample_energies)`` and re-evaluating
    ``best_state`` reproduces it within 1e-9. ``elapsed`` is wall-clock
    seconds and is the one field that varies between identically-seeded runs.
    """

    best_state: np.ndarray
    best_energy: float
    sample_energies: np.ndarray
    elapsed: float
    config_echo: dict
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "best_state", np.asarray(self.best_state))
        object.__setattr__(self, "sample_energies",
                           np.asarray(self.sample_energies, dtype=np.float64))
        if self.sample_energies.size and self.best_energy != float(self.sample_energies.min()):
            raise DomainError("best_energy must equal min(sample_energies)")
