"""Deterministic dataset generators: Gaussian blobs, uniform ellipse fill,
and the fixed 12-point instance that defeats a badly initialized k-means.

All generators are pure functions of their spec; RNG streams come from
``numpy.random.SeedSequence([seed])`` with the PCG64 generator, so reruns are
byte-identical across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError
from .model import Dataset


@dataclass(frozen=True, eq=False)
class BlobSpec:
    """Isotropic Gaussian blobs around k centers.

    Omitted centers are placed on a deterministic lattice with spacing
    3*std (overlapping tails) or 10*std (well separated) depending on
    ``allow_overlap``.
    """

    n_total: int
    k_blobs: int
    dims: int = 2
    centers: np.ndarray | None = None
    std: float = 1.0
    allow_overlap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.k_blobs < 1 or self.n_total < self.k_blobs:
            raise ConfigurationError(
                f"need n_total >= k_blobs >= 1, got {self.n_total}, {self.k_blobs}")
        if self.dims < 1:
            raise ConfigurationError("dims must be >= 1")
        if self.std <= 0:
            raise ConfigurationError("std must be positive")
        if self.centers is not None:
            centers = np.asarray(self.centers, dtype=np.float64)
            if centers.shape != (self.k_blobs, self.dims):
                raise DimensionError(
                    f"centers must be {self.k_blobs}×{self.dims}, got {centers.shape}")
            object.__setattr__(self, "centers", centers)


@dataclass(frozen=True)
class EllipseSpec:
    """Uniform fill of a rotated, translated ellipse interior."""

    n_total: int
    semi_axis_a: float = 1.0
    semi_axis_b: float = 1.0
    rotation: float = 0.0
    center: tuple[float, float] = (0.0, 0.0)
    seed: int = 0

    def __post_init__(self):
        if self.n_total < 1:
            raise ConfigurationError("n_total must be >= 1")
        if not self.semi_axis_a >= self.semi_axis_b > 0:
            raise ConfigurationError(
                f"need semi_axis_a >= semi_axis_b > 0, got {self.semi_axis_a}, {self.semi_axis_b}")


def _lattice_centers(k: int, dims: int, spacing: float) -> np.ndarray:
    side = math.ceil(k ** (1.0 / dims))
    centers = np.zeros((k, dims))
    for idx in range(k):
        rem = idx
        for axis in range(dims - 1, -1, -1):
            centers[idx, axis] = rem % side
            rem //= side
    return centers * spacing


def gaussian_blobs(spec: BlobSpec) -> Dataset:
    """n_total points split as evenly as possible over the blob centers;
    true_labels record the generating blob."""
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed]))
    if spec.centers is not None:
        centers = spec.centers
    else:
        spacing = (3.0 if spec.allow_overlap else 10.0) * spec.std
        centers = _lattice_centers(spec.k_blobs, spec.dims, spacing)
    base, extra = divmod(spec.n_total, spec.k_blobs)
    points = []
    labels = []
    for b in range(spec.k_blobs):
        count = base + (1 if b < extra else 0)
        points.append(rng.normal(loc=centers[b], scale=spec.std, size=(count, spec.dims)))
        labels.extend([b] * count)
    return Dataset(points=np.concatenate(points, axis=0),
                   true_labels=np.array(labels, dtype=np.int64))


def ellipse_uniform(spec: EllipseSpec) -> Dataset:
    """Rejection-sample the unit disk, stretch to the semi-axes, rotate,
    translate. Every returned point satisfies the interior predicate."""
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed]))
    collected = np.empty((0, 2))
    while collected.shape[0] < spec.n_total:
        batch = rng.uniform(-1.0, 1.0, size=(max(64, 2 * spec.n_total), 2))
        inside = np.sum(batch * batch, axis=1) <= 1.0
        collected = np.concatenate([collected, batch[inside]], axis=0)
    uv = collected[:spec.n_total]
    xy = uv * np.array([spec.semi_axis_a, spec.semi_axis_b])
    c, s = math.cos(spec.rotation), math.sin(spec.rotation)
    rot = np.array([[c, -s], [s, c]])
    return Dataset(points=xy @ rot.T + np.asarray(spec.center, dtype=np.float64))


# Fixed 12-point instance: four tight 3-point groups at the corners of a
# square (the square keeps every inter-site distance within a factor two of
# the largest, which gives solvers the cleanest gap structure 2-D allows).
_GROUP_SITES = np.array([[0.0, 0.0], [0.0, 10.0], [10.0, 0.0], [10.0, 10.0]])
_GROUP_OFFSETS = np.array([[0.0, 0.4], [-0.35, -0.2], [0.35, -0.2]])

# One centroid midway between the two left groups, the other three crowding
# the two right groups: the classic unlucky initialization.
_ADVERSARIAL_CENTROIDS = np.array([
    [0.0, 5.0],
    [10.0, -0.5],
    [10.0, 0.5],
    [10.0, 10.0],
])


def pedagogical_instance() -> tuple[Dataset, np.ndarray]:
    """The fixed demonstration instance plus its adversarial k-means start.

    Exhaustive search recovers the four planted groups; Lloyd iterations from
    the returned centroids converge to a strictly worse assignment that
    merges the left pair of groups and splits one right group in two.
    """
    points = (_GROUP_SITES[:, None, :] + _GROUP_OFFSETS[None, :, :]).reshape(-1, 2)
    labels = np.repeat(np.arange(4), 3)
    return Dataset(points=points, true_labels=labels), _ADVERSARIAL_CENTROIDS.copy()
