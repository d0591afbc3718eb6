"""Builds optimization problems from a distance matrix and decodes solver states.

Two encodings are provided: a one-hot K-cluster QUBO in which point i uses
binary variables q[i*K .. i*K+K-1] (point-major, exactly one set in a valid
state), and a constraint-free 2-cluster Ising model in which the spin sign is
the cluster membership. A penalty weight enforces one-hot validity; helpers
select it, check hardware-precision feasibility, and convert exactly between
QUBO and Ising forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError, DomainError
from .model import ClusterAssignment, DistanceMatrix, IsingProblem, QuboProblem

LAMBDA_MODES = ("paper_bound", "paper_practice", "explicit")


@dataclass(frozen=True)
class OneHotConfig:
    """Cluster count and resolved penalty weight for the one-hot builder."""

    k: int
    lambda_mode: str = "paper_bound"
    lambda_value: float = 0.0

    def __post_init__(self):
        if self.k < 2:
            raise ConfigurationError(f"k must be >= 2, got {self.k}")
        if self.lambda_mode not in LAMBDA_MODES:
            raise ConfigurationError(f"unknown lambda_mode {self.lambda_mode!r}")
        if self.lambda_value < 0:
            raise ConfigurationError("lambda_value must be nonnegative")


@dataclass(frozen=True)
class PrecisionReport:
    """Feasibility of an instance under n-bit integer coefficient hardware.

    ``d_bound`` is None for k <= 2: the binary formulation carries no
    constraint penalty, so the bound does not apply.
    """

    n_bits: int
    n_points: int
    k: int
    d_bound: float | None
    feasible: bool
    max_observed_d: float


@dataclass(frozen=True)
class ConstraintViolation:
    """A point whose one-hot block has zero or more than one bit set."""

    point_index: int
    kind: str  # "no_cluster" | "multiple_clusters"
    clusters_set: tuple[int, ...]


def resolve_lambda(d: DistanceMatrix, k: int, mode: str,
                   explicit_value: float | None = None) -> float:
    """Penalty weight for the one-hot constraint term.

    Modes:
        paper_bound: (N - k) * max(d), floored at 1.0 when all distances
            are zero (any positive weight suffices then).
        paper_practice: N; valid only for a matrix normalized to [0, 1],
            where it dominates the (N - k) bound.
        explicit: caller-supplied value; must be >= 0 (zero deliberately
            disables the constraint, for demonstrating violations).
    """
    n = d.n
    if not (2 <= k <= n - 1):
        raise ConfigurationError(f"need 2 <= k <= N-1, got k={k}, N={n}")
    if mode == "paper_bound":
        lam = (n - k) * d.max_entry
        return lam if lam > 0 else 1.0
    if mode == "paper_practice":
        if not d.normalized:
            raise ConfigurationError("paper_practice penalty requires a normalized distance matrix")
        return float(n)
    if mode == "explicit":
        if explicit_value is None:
            raise ConfigurationError("explicit lambda_mode requires a value")
        if explicit_value < 0:
            raise ConfigurationError(f"explicit lambda must be >= 0, got {explicit_value}")
        return float(explicit_value)
    raise ConfigurationError(f"unknown lambda_mode {mode!r}")


def build_onehot_qubo(d: DistanceMatrix, config: OneHotConfig) -> QuboProblem:
    """One-hot K-cluster QUBO over N*K variables, (point, cluster) -> i*K + a.

    Expanding the squared one-hot penalty with q^2 = q gives, per point,
    linear terms -lambda, couplings +2*lambda between that point's cluster
    bits, and a +lambda constant kept in the offset; pairwise dissimilarities
    couple same-cluster bits of different points. A valid one-hot state
    therefore has energy exactly equal to the within-cluster dissimilarity
    objective.
    """
    n, k, lam = d.n, config.k, config.lambda_value
    if k > n:
        raise ConfigurationError(f"one-hot encoding needs N >= k, got N={n}, k={k}")
    n_vars = n * k
    linear = np.full(n_vars, -lam, dtype=np.float64)
    quadratic: dict[tuple[int, int], float] = {}
    if lam != 0.0:
        for i in range(n):
            base = i * k
            for a in range(k):
                for b in range(a + 1, k):
                    quadratic[(base + a, base + b)] = 2.0 * lam
    dist = d.d
    for i in range(n):
        for j in range(i + 1, n):
            dij = dist[i, j]
            if dij != 0.0:
                for a in range(k):
                    quadratic[(i * k + a, j * k + a)] = dij
    var_labels = tuple((i, a) for i in range(n) for a in range(k))
    return QuboProblem(n_vars=n_vars, linear=linear, quadratic=quadratic,
                       offset=n * lam, var_labels=var_labels)


def build_binary_ising(d: DistanceMatrix) -> IsingProblem:
    """Constraint-free 2-cluster Ising model: J[i,j] = d[i,j], no biases.

    Large dissimilarities push spins to opposite signs (different clusters);
    the unique-pair couplings are the half-sum over ordered pairs.
    """
    n = d.n
    if n < 2:
        raise ConfigurationError(f"binary clustering needs N >= 2, got {n}")
    dist = d.d
    J = {(i, j): float(dist[i, j])
         for i in range(n) for j in range(i + 1, n) if dist[i, j] != 0.0}
    return IsingProblem(n_vars=n, h=np.zeros(n), J=J, offset=0.0)


def qubo_to_ising(problem: QuboProblem) -> IsingProblem:
    """Exact substitution q = (s + 1)/2 with all constants kept in the offset.

    Energies agree state-for-state: E_qubo(q) == E_ising(2q - 1).
    """
    n = problem.n_vars
    h = problem.linear / 2.0
    J: dict[tuple[int, int], float] = {}
    offset = problem.offset + float(problem.linear.sum()) / 2.0
    for (i, j), c in problem.quadratic.items():
        quarter = c / 4.0
        if quarter != 0.0:
            J[(i, j)] = quarter
        h[i] += quarter
        h[j] += quarter
        offset += quarter
    return IsingProblem(n_vars=n, h=h, J=J, offset=offset)


def ising_to_qubo(problem: IsingProblem) -> QuboProblem:
    """Exact inverse substitution s = 2q - 1; round-trips qubo_to_ising."""
    n = problem.n_vars
    linear = 2.0 * problem.h
    quadratic: dict[tuple[int, int], float] = {}
    offset = problem.offset - float(problem.h.sum())
    for (i, j), c in problem.J.items():
        quad = 4.0 * c
        if quad != 0.0:
            quadratic[(i, j)] = quad
        linear[i] -= 2.0 * c
        linear[j] -= 2.0 * c
        offset += c
    return QuboProblem(n_vars=n, linear=linear, quadratic=quadratic, offset=offset)


def precision_check(d: DistanceMatrix, k: int, n_bits: int) -> PrecisionReport:
    """Whether the instance fits n-bit integer coefficients.

    For k > 2 the admissible dissimilarity magnitude is
    2*(2**(n_bits-1) - 1) / ((N - k)*(k - 2)); k <= 2 is exempt (the binary
    formulation has no penalty couplings competing for the coefficient range).
    """
    if n_bits < 2:
        raise ConfigurationError(f"n_bits must be >= 2, got {n_bits}")
    if k < 2:
        raise ConfigurationError(f"k must be >= 2, got {k}")
    n = d.n
    max_d = d.max_entry
    if k <= 2:
        return PrecisionReport(n_bits=n_bits, n_points=n, k=k, d_bound=None,
                               feasible=True, max_observed_d=max_d)
    if n - k < 1:
        raise ConfigurationError(f"precision bound assumes N >= k+1, got N={n}, k={k}")
    d_bound = 2.0 * (2 ** (n_bits - 1) - 1) / ((n - k) * (k - 2))
    return PrecisionReport(n_bits=n_bits, n_points=n, k=k, d_bound=d_bound,
                           feasible=bool(max_d <= d_bound), max_observed_d=max_d)


def _onehot_blocks(state, n: int, k: int) -> np.ndarray:
    s = np.asarray(state)
    if s.shape != (n * k,):
        raise DimensionError(f"state has shape {s.shape}, expected ({n * k},)")
    if not np.all(np.isin(s, (0, 1))):
        raise DomainError("one-hot state entries must be 0 or 1")
    return s.reshape(n, k)


def decode_onehot(state, n: int, k: int, policy: str = "strict",
                  d: DistanceMatrix | None = None
                  ) -> ClusterAssignment | list[ConstraintViolation]:
    """Decode a one-hot QUBO state back to a cluster assignment.

    strict: returns the assignment iff every point has exactly one bit set,
    otherwise the full list of violations.

    repair: points with no bit set go to the cluster that adds the least
    within-cluster dissimilarity; points with several bits keep, among those,
    the cheapest cluster (ties -> lowest cluster index). Requires ``d`` when
    anything needs repair; the result is tagged as repaired.
    """
    if policy not in ("strict", "repair"):
        raise ConfigurationError(f"unknown decode policy {policy!r}")
    blocks = _onehot_blocks(state, n, k)
    counts = blocks.sum(axis=1)
    labels = np.full(n, -1, dtype=np.int64)
    violations: list[ConstraintViolation] = []
    for i in range(n):
        set_clusters = tuple(int(a) for a in np.flatnonzero(blocks[i]))
        if counts[i] == 1:
            labels[i] = set_clusters[0]
        elif counts[i] == 0:
            violations.append(ConstraintViolation(i, "no_cluster", ()))
        else:
            violations.append(ConstraintViolation(i, "multiple_clusters", set_clusters))

    if not violations:
        return ClusterAssignment(labels=labels, k=k, source_tag="decode_onehot")
    if policy == "strict":
        return violations

    if d is None:
        raise ConfigurationError("repair policy needs the distance matrix")

    def attach_cost(i: int, a: int) -> float:
        members = labels == a
        return float(d.d[i, members].sum())

    # Resolve multiple-assignment points first (restricted choice), then
    # unassigned ones; both in point order for determinism.
    for v in violations:
        if v.kind == "multiple_clusters":
            costs = [(attach_cost(v.point_index, a), a) for a in v.clusters_set]
            labels[v.point_index] = min(costs)[1]
    for v in violations:
        if v.kind == "no_cluster":
            costs = [(attach_cost(v.point_index, a), a) for a in range(k)]
            labels[v.point_index] = min(costs)[1]
    return ClusterAssignment(labels=labels, k=k, source_tag="decode_onehot_repaired")


def decode_binary(state) -> ClusterAssignment:
    """Spin +1 -> cluster 0, spin -1 -> cluster 1. A global flip swaps labels
    but yields the same partition."""
    s = np.asarray(state)
    if s.ndim != 1 or s.size < 1:
        raise DimensionError("state must be a non-empty spin vector")
    if not np.all(np.isin(s, (-1, 1))):
        raise DomainError("spin state entries must be -1 or +1")
    labels = np.where(s == 1, 0, 1).astype(np.int64)
    return ClusterAssignment(labels=labels, k=2, source_tag="decode_binary")
