"""k-means baseline (Lloyd iterations) and the two comparison metrics.

The within-cluster dissimilarity objective W weights each cluster's spread
by its size; inertia (sum of squared point-to-centroid distances) does not.
Both are reported side by side wherever methods are compared.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError, DomainError
from .model import ClusterAssignment, Dataset, DistanceMatrix
from .solvers import derive_seed

_STREAM_KMEANS_RUN = 7

INIT_METHODS = ("random", "kmeans_pp")


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    init: str = "kmeans_pp"
    n_init: int = 10
    max_iterations: int = 300
    tol: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError("k must be >= 1")
        if self.init not in INIT_METHODS:
            raise ConfigurationError(f"unknown init {self.init!r}; expected {INIT_METHODS}")
        if self.n_init < 1:
            raise ConfigurationError("n_init must be >= 1")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if self.tol < 0:
            raise ConfigurationError("tol must be nonnegative")
        if self.seed < 0:
            raise ConfigurationError("seed must be nonnegative")


@dataclass(frozen=True, eq=False)
class KMeansResult:
    assignment: ClusterAssignment
    centroids: np.ndarray
    inertia: float
    iterations_run: int
    init_used: str
    inertia_history: tuple[float, ...] = ()


def objective_w(d: DistanceMatrix, assignment: ClusterAssignment) -> float:
    """Half the sum of within-cluster dissimilarities over ordered pairs."""
    if assignment.n != d.n:
        raise DimensionError(f"assignment covers {assignment.n} points, matrix has {d.n}")
    labels = assignment.labels
    same = labels[:, None] == labels[None, :]
    return 0.5 * float(d.d[same].sum())


def cluster_centroids(data: Dataset, assignment: ClusterAssignment) -> np.ndarray:
    """Mean of each used cluster; rows for unused cluster ids are NaN."""
    if assignment.n != data.n:
        raise DimensionError(f"assignment covers {assignment.n} points, dataset has {data.n}")
    centroids = np.full((assignment.k, data.dims), np.nan)
    for a in assignment.used_clusters:
        centroids[a] = data.points[assignment.labels == a].mean(axis=0)
    return centroids


def inertia(data: Dataset, assignment: ClusterAssignment) -> float:
    """Sum of squared Euclidean distances from each point to its cluster mean."""
    centroids = cluster_centroids(data, assignment)
    diffs = data.points - centroids[assignment.labels]
    return float(np.sum(diffs * diffs))


def _assign(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = np.sum((x[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
    return np.argmin(d2, axis=1)  # ties -> lowest centroid index


def _update(x: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    k = centroids.shape[0]
    new = centroids.copy()
    reseeded: set[int] = set()
    for a in range(k):
        members = labels == a
        if members.any():
            new[a] = x[members].mean(axis=0)
        else:
            # Reseed an empty cluster at the point farthest from its centroid
            # (skipping points already claimed by another reseed this pass).
            dist = np.sum((x - centroids[a]) ** 2, axis=1)
            for idx in reseeded:
                dist[idx] = -1.0
            far = int(np.argmax(dist))
            new[a] = x[far]
            reseeded.add(far)
    return new


def _lloyd(x: np.ndarray, centroids: np.ndarray, max_iterations: int, tol: float):
    prev = np.inf
    history: list[float] = []
    labels = np.zeros(x.shape[0], dtype=np.int64)
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        labels = _assign(x, centroids)
        centroids = _update(x, labels, centroids)
        cur = float(np.sum((x - centroids[labels]) ** 2))
        history.append(cur)
        if prev - cur < tol:
            break
        prev = cur
    return labels, centroids, history[-1], iterations, tuple(history)


def _init_random(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    idx = rng.choice(x.shape[0], size=k, replace=False)
    return x[idx].copy()


def _init_kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Standard D^2 sampling: each new centroid drawn with probability
    proportional to the squared distance to the nearest existing one."""
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[int(rng.integers(n))]
    d2 = np.sum((x - centroids[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            idx = int(rng.integers(n))
        centroids[c] = x[idx]
        d2 = np.minimum(d2, np.sum((x - centroids[c]) ** 2, axis=1))
    return centroids


def kmeans(data: Dataset, config: KMeansConfig) -> KMeansResult:
    """Best of ``n_init`` Lloyd runs, each with its own (seed, run) RNG stream.

    Assignment ties go to the lowest centroid index; convergence is declared
    when the absolute inertia improvement drops below ``tol``.
    """
    x = data.points
    if config.k > data.n:
        raise ConfigurationError(f"k={config.k} exceeds the {data.n} data points")
    best = None
    for run in range(config.n_init):
        rng = np.random.default_rng(
            np.random.SeedSequence([derive_seed(config.seed, _STREAM_KMEANS_RUN, run)]))
        if config.init == "random":
            centroids = _init_random(x, config.k, rng)
        else:
            centroids = _init_kmeans_pp(x, config.k, rng)
        labels, centroids, cur, iters, history = _lloyd(
            x, centroids, config.max_iterations, config.tol)
        if best is None or cur < best[0]:
            best = (cur, labels, centroids, iters, history)
    cur, labels, centroids, iters, history = best
    assignment = ClusterAssignment(labels=labels, k=config.k,
                                   source_tag=f"kmeans_{'pp' if config.init == 'kmeans_pp' else 'random'}")
    return KMeansResult(assignment=assignment, centroids=centroids, inertia=cur,
                        iterations_run=iters, init_used=config.init,
                        inertia_history=history)


def kmeans_with_explicit_init(data: Dataset, k: int, centroids: np.ndarray,
                              max_iterations: int = 300, tol: float = 1e-4) -> KMeansResult:
    """One Lloyd run from caller-supplied centroids (exposes bad-init behavior)."""
    x = data.points
    if k > data.n:
        raise ConfigurationError(f"k={k} exceeds the {data.n} data points")
    centroids = np.asarray(centroids, dtype=np.float64)
    if centroids.shape != (k, data.dims):
        raise DimensionError(f"centroids must be {k}×{data.dims}, got {centroids.shape}")
    if not np.all(np.isfinite(centroids)):
        raise DomainError("centroids contain non-finite values")
    labels, centroids, cur, iters, history = _lloyd(x, centroids.copy(), max_iterations, tol)
    assignment = ClusterAssignment(labels=labels, k=k, source_tag="kmeans_explicit")
    return KMeansResult(assignment=assignment, centroids=centroids, inertia=cur,
                        iterations_run=iters, init_used="explicit",
                        inertia_history=history)
