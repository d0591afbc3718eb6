"""Minimizers for QUBO/Ising problems and the exhaustive clustering oracles.

Deterministic contracts: every stochastic solver derives all of its
randomness from ``numpy.random.SeedSequence([seed, stream, ...])`` with fixed
stream tags (0 = SA chains, 1 = SA temperature calibration, 2 = tabu start,
3 = decomposition rounds, 4 = decomposition start), so identical
(problem, config, seed) triples reproduce identical reports regardless of
execution order. Ties break toward the lowest index / lexicographically
smallest state everywhere.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from . import _kernels
from .errors import ConfigurationError, DomainError, SizeLimitError
from .formulation import ising_to_qubo
from .model import (ClusterAssignment, DistanceMatrix, IsingProblem,
                    QuboProblem, SolveReport)

Problem = Union[QuboProblem, IsingProblem]

BRUTE_FORCE_VAR_LIMIT = 24
PARTITION_GUARD = 10 ** 7

_STREAM_SA_CHAIN = 0
_STREAM_SA_CALIBRATION = 1
_STREAM_TABU_START = 2
_STREAM_DECOMP_ROUND = 3
_STREAM_DECOMP_START = 4


def derive_seed(seed: int, *stream: int) -> int:
    """31-bit sub-seed for a named stream of a master seed."""
    state = np.random.SeedSequence([seed, *stream]).generate_state(1)[0]
    return int(state & 0x7FFFFFFF)


# ---------------------------------------------------------------------------
# Solver configurations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SaSchedule:
    """Simulated-annealing schedule; 1000 best-of samples by default.

    ``t_initial=None`` calibrates the start temperature from the lower decile
    of sampled uphill move costs (so cheap rearrangements stay mobile without
    boiling the state); ``t_final=None`` means a third of that. The defaults
    keep the whole run inside the productive temperature band and lean on the
    independent restarts for exploration.
    """

    t_initial: float | None = None
    t_final: float | None = None
    sweeps: int = 4000
    cooling: str = "geometric"  # or "linear"
    samples: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.sweeps < 1:
            raise ConfigurationError("sweeps must be >= 1")
        if self.samples < 1:
            raise ConfigurationError("samples must be >= 1")
        if self.cooling not in ("geometric", "linear"):
            raise ConfigurationError(f"unknown cooling law {self.cooling!r}")
        if self.t_initial is not None and self.t_initial <= 0:
            raise ConfigurationError("t_initial must be positive")
        if self.t_final is not None:
            if self.t_final <= 0:
                raise ConfigurationError("t_final must be positive")
            if self.t_initial is not None and self.t_initial < self.t_final:
                raise ConfigurationError("need t_initial >= t_final")
        if self.seed < 0:
            raise ConfigurationError("seed must be nonnegative")


@dataclass(frozen=True)
class TabuConfig:
    """Tabu search parameters; ``tenure=None`` resolves to max(1, n_vars // 4)."""

    tenure: int | None = None
    max_iterations: int = 1000
    stall_limit: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.tenure is not None and self.tenure < 1:
            raise ConfigurationError("tenure must be >= 1")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")
        if self.stall_limit < 1:
            raise ConfigurationError("stall_limit must be >= 1")
        if self.seed < 0:
            raise ConfigurationError("seed must be nonnegative")


@dataclass(frozen=True)
class DecompositionConfig:
    """qbsolv-style split/stitch solver: nrepeat rounds of clamped sub-QUBOs."""

    subqubo_size: int = 50
    nrepeat: int = 50
    backend: str = "tabu"  # "tabu" | "simulated_annealing" | "brute_force"
    seed: int = 0

    def __post_init__(self):
        if self.subqubo_size < 2:
            raise ConfigurationError("subqubo_size must be >= 2")
        if self.nrepeat < 1:
            raise ConfigurationError("nrepeat must be >= 1")
        if self.backend not in ("tabu", "simulated_annealing", "brute_force"):
            raise ConfigurationError(f"unknown backend {self.backend!r}")
        if self.backend == "brute_force" and self.subqubo_size > BRUTE_FORCE_VAR_LIMIT:
            raise ConfigurationError(
                f"brute_force backend limited to {BRUTE_FORCE_VAR_LIMIT} variables per sub-QUBO"
            )
        if self.seed < 0:
            raise ConfigurationError("seed must be nonnegative")


@dataclass(frozen=True)
class BruteForceConfig:
    """Marker config selecting exhaustive enumeration in solve_problem."""

    seed: int = 0


SolverConfig = Union[SaSchedule, TabuConfig, DecompositionConfig, BruteForceConfig]


# ---------------------------------------------------------------------------
# Problem plumbing
# ---------------------------------------------------------------------------

def _problem_arrays(problem: Problem):
    """(indptr, indices, data, lin, offset, is_spin) CSR view of a problem."""
    if isinstance(problem, QuboProblem):
        lin, is_spin = problem.linear, False
    elif isinstance(problem, IsingProblem):
        lin, is_spin = problem.h, True
    else:
        raise ConfigurationError(f"not a QUBO/Ising problem: {type(problem).__name__}")
    n = problem.n_vars
    ti, tj, tc = problem._terms
    rows = np.concatenate([ti, tj])
    cols = np.concatenate([tj, ti])
    vals = np.concatenate([tc, tc])
    order = np.argsort(rows, kind="stable")
    indptr = np.zeros(n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(np.bincount(rows, minlength=n))
    return (indptr, cols[order].astype(np.int64), vals[order],
            np.asarray(lin, dtype=np.float64), float(problem.offset), is_spin)


def _batch_energies(problem: Problem, states: np.ndarray) -> np.ndarray:
    """Exact energies for a (runs, n_vars) batch of states."""
    ti, tj, tc = problem._terms
    x = states.astype(np.float64)
    lin = problem.h if isinstance(problem, IsingProblem) else problem.linear
    e = problem.offset + x @ lin
    if tc.size:
        e = e + (x[:, ti] * x[:, tj]) @ tc
    return e


def _elapsed_since(t0: float) -> float:
    return time.perf_counter() - t0


# ---------------------------------------------------------------------------
# Exhaustive oracles
# ---------------------------------------------------------------------------

def _states_from_indices(ms: np.ndarray, n: int, is_spin: bool) -> np.ndarray:
    shifts = (n - 1 - np.arange(n)).astype(np.int64)
    bits = ((ms[:, None] >> shifts[None, :]) & 1).astype(np.int8)
    return (2 * bits - 1) if is_spin else bits


def enumerate_energies(problem: Problem, limit: int = 20) -> np.ndarray:
    """Energies of all 2**n states, indexed lexicographically (for Ising,
    bit 1 maps to spin +1). Guarded to small n; mainly a test oracle."""
    n = problem.n_vars
    if n > limit:
        raise SizeLimitError(f"enumeration of {n} variables exceeds limit {limit}")
    _, _, _, _, _, is_spin = _problem_arrays(problem)
    ms = np.arange(1 << n, dtype=np.int64)
    return _batch_energies(problem, _states_from_indices(ms, n, is_spin))


def brute_force_minimize(problem: Problem) -> SolveReport:
    """Exact global minimum by enumerating all 2**n states (n <= 24).

    Ties break toward the lexicographically smallest state.
    """
    n = problem.n_vars
    if n > BRUTE_FORCE_VAR_LIMIT:
        raise SizeLimitError(
            f"brute force limited to {BRUTE_FORCE_VAR_LIMIT} variables, got {n}"
        )
    t0 = time.perf_counter()
    _, _, _, _, _, is_spin = _problem_arrays(problem)
    best_e = math.inf
    best_m = 0
    chunk = 1 << 16
    total = 1 << n
    for lo in range(0, total, chunk):
        ms = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        e = _batch_energies(problem, _states_from_indices(ms, n, is_spin))
        am = int(np.argmin(e))
        if e[am] < best_e:
            best_e = float(e[am])
            best_m = int(ms[am])
    best_state = _states_from_indices(np.array([best_m], dtype=np.int64), n, is_spin)[0]
    return SolveReport(best_state=best_state, best_energy=best_e,
                       sample_energies=np.array([best_e]),
                       elapsed=_elapsed_since(t0),
                       config_echo={"solver": "brute_force"}, seed=0)


def count_assignments(n: int, k: int) -> int:
    """Number of ways to split n items into exactly k non-empty clusters,
    evaluated exactly via the alternating binomial sum."""
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    total = sum((-1) ** (k - i) * math.comb(k, i) * i ** n for i in range(1, k + 1))
    return total // math.factorial(k)


def enumerate_partitions(n: int, k: int) -> Iterator[list[int]]:
    """Yield every partition of n items into exactly k non-empty clusters as
    a canonical label list (restricted growth order, first-seen labeling)."""
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    labels = [0] * n

    def rec(i: int, used: int):
        if n - i < k - used:
            return
        if i == n:
            if used == k:
                yield labels.copy()
            return
        for a in range(min(used + 1, k)):
            labels[i] = a
            yield from rec(i + 1, used + (1 if a == used else 0))

    yield from rec(0, 0)


def brute_force_clustering(d: DistanceMatrix, k: int) -> tuple[ClusterAssignment, float]:
    """Globally optimal k-clustering by examining every partition.

    Returns the assignment minimizing the half-sum of within-cluster
    dissimilarities, with ties broken toward the first partition in canonical
    enumeration order. Guarded to count_assignments(n, k) <= 1e7.
    """
    n = d.n
    n_partitions = count_assignments(n, k)
    if n_partitions > PARTITION_GUARD:
        raise SizeLimitError(
            f"{n_partitions} partitions exceed the enumeration guard {PARTITION_GUARD}"
        )
    dist = d.d.tolist()
    labels = [0] * n
    members: list[list[int]] = [[] for _ in range(k)]
    best_w = math.inf
    best: list[int] | None = None

    def rec(i: int, used: int, w: float):
        nonlocal best_w, best
        if n - i < k - used:
            return
        if i == n:
            if used == k and w < best_w:
                best_w = w
                best = labels.copy()
            return
        row = dist[i]
        for a in range(min(used + 1, k)):
            add = 0.0
            for j in members[a]:
                add += row[j]
            labels[i] = a
            members[a].append(i)
            rec(i + 1, used + (1 if a == used else 0), w + add)
            members[a].pop()

    rec(0, 0, 0.0)
    assert best is not None
    assignment = ClusterAssignment(labels=np.array(best, dtype=np.int64), k=k,
                                   source_tag="brute_force_clustering")
    return assignment, best_w


# ---------------------------------------------------------------------------
# Metaheuristics
# ---------------------------------------------------------------------------

def _calibrate_t_initial(arrays, seed: int) -> float:
    """Start temperature from the lower decile of sampled uphill move costs.

    The decile ignores the constraint-penalty scale that dominates the mean
    on penalized encodings; dividing by 2 accepts those cheapest uphill moves
    roughly 14% of the time at the start, which keeps chains mobile where the
    objective differences live instead of boiling through the penalty
    barrier.
    """
    indptr, indices, data, lin, _, is_spin = arrays
    n = lin.size
    rng = np.random.default_rng(np.random.SeedSequence([seed, _STREAM_SA_CALIBRATION]))
    uphill = []
    for _ in range(32):
        x = rng.integers(0, 2, size=n).astype(np.int8)
        if is_spin:
            x = (2 * x - 1).astype(np.int8)
        f = _kernels.local_fields(indptr, indices, data, lin, x)
        de = (-2 * x) * f if is_spin else (1 - 2 * x) * f
        uphill.append(de[de > 0])
    de_up = np.concatenate(uphill)
    if de_up.size == 0:
        return 1.0
    return float(np.quantile(de_up, 0.10) / 2.0)


def _temperatures(t_initial: float, t_final: float, sweeps: int, cooling: str) -> np.ndarray:
    if sweeps == 1:
        return np.array([t_initial])
    steps = np.arange(sweeps, dtype=np.float64)
    if cooling == "geometric":
        ratio = (t_final / t_initial) ** (1.0 / (sweeps - 1))
        return t_initial * ratio ** steps
    return t_initial + (t_final - t_initial) * steps / (sweeps - 1)


def simulated_annealing(problem: Problem, schedule: SaSchedule) -> SolveReport:
    """Best-of-``samples`` independent Metropolis chains.

    Each chain starts from a random state and performs ``sweeps`` full
    single-flip sweeps with uphill acceptance exp(-dE/T); per-chain RNG
    streams derive from (seed, chain index). The returned ``sample_energies``
    hold each chain's exact best energy.
    """
    t0 = time.perf_counter()
    arrays = _problem_arrays(problem)
    t_init = schedule.t_initial if schedule.t_initial is not None \
        else _calibrate_t_initial(arrays, schedule.seed)
    t_fin = schedule.t_final if schedule.t_final is not None else t_init / 3.0
    if not t_init >= t_fin > 0:
        raise ConfigurationError(f"need t_initial >= t_final > 0, got {t_init}, {t_fin}")
    temps = _temperatures(t_init, t_fin, schedule.sweeps, schedule.cooling)
    chain_seeds = np.array(
        [derive_seed(schedule.seed, _STREAM_SA_CHAIN, c) for c in range(schedule.samples)],
        dtype=np.int64)
    indptr, indices, data, lin, offset, is_spin = arrays
    best_states = _kernels.sa_chains(indptr, indices, data, lin, offset,
                                     is_spin, temps, chain_seeds)
    energies = _batch_energies(problem, best_states)
    idx = int(np.argmin(energies))
    echo = {"solver": "simulated_annealing", "t_initial": t_init, "t_final": t_fin,
            "sweeps": schedule.sweeps, "cooling": schedule.cooling,
            "samples": schedule.samples, "seed": schedule.seed}
    return SolveReport(best_state=best_states[idx], best_energy=float(energies[idx]),
                       sample_energies=energies, elapsed=_elapsed_since(t0),
                       config_echo=echo, seed=schedule.seed)


def _random_state(n: int, is_spin: bool, seed: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    x = rng.integers(0, 2, size=n).astype(np.int8)
    return (2 * x - 1).astype(np.int8) if is_spin else x


def tabu_search(problem: Problem, config: TabuConfig,
                initial_state: np.ndarray | None = None) -> SolveReport:
    """Deterministic tabu descent from a seeded random start state (or an
    explicit one, used by the decomposition solver to warm-start)."""
    t0 = time.perf_counter()
    arrays = _problem_arrays(problem)
    indptr, indices, data, lin, offset, is_spin = arrays
    n = problem.n_vars
    tenure = config.tenure if config.tenure is not None else max(1, n // 4)
    if initial_state is None:
        x0 = _random_state(n, is_spin, derive_seed(config.seed, _STREAM_TABU_START))
    else:
        x0 = np.asarray(initial_state, dtype=np.int8)
    best_state = _kernels.tabu_run(indptr, indices, data, lin, offset, is_spin,
                                   tenure, config.max_iterations,
                                   config.stall_limit, x0)
    energy = float(_batch_energies(problem, best_state[None, :])[0])
    echo = {"solver": "tabu_search", "tenure": tenure,
            "max_iterations": config.max_iterations,
            "stall_limit": config.stall_limit, "seed": config.seed}
    return SolveReport(best_state=best_state, best_energy=energy,
                       sample_energies=np.array([energy]),
                       elapsed=_elapsed_since(t0), config_echo=echo, seed=config.seed)


def _backend_solve(sub: QuboProblem, backend: str, round_seed: int,
                   warm_start: np.ndarray) -> SolveReport:
    m = sub.n_vars
    if backend == "brute_force":
        return brute_force_minimize(sub)
    if backend == "tabu":
        return tabu_search(sub, TabuConfig(tenure=None, max_iterations=40 * m,
                                           stall_limit=4 * m, seed=round_seed),
                           initial_state=warm_start)
    return simulated_annealing(sub, SaSchedule(sweeps=150, samples=8, seed=round_seed))


def _clamped_subproblem(problem: QuboProblem, terms, f: np.ndarray, x: np.ndarray,
                        energy: float, sel: np.ndarray) -> QuboProblem:
    """Sub-QUBO over ``sel`` with all other variables clamped at ``x``.

    Couplings to clamped variables fold into the linear terms; the offset is
    fixed so the sub-problem's energy at any sub-state equals the full
    problem's energy at the stitched state.
    """
    ti, tj, tc = terms
    n = x.size
    m = sel.size
    pos = np.full(n, -1, dtype=np.int64)
    pos[sel] = np.arange(m)
    inside = np.zeros(n, dtype=bool)
    inside[sel] = True
    mask = inside[ti] & inside[tj]
    ii, jj, cc = ti[mask], tj[mask], tc[mask]
    xf = x.astype(np.float64)
    # Clamped linear terms: local field minus the contributions of the
    # selected variables themselves.
    sub_lin = f[sel].copy()
    np.add.at(sub_lin, pos[ii], -cc * xf[jj])
    np.add.at(sub_lin, pos[jj], -cc * xf[ii])
    sub_quad = {(int(pos[a]), int(pos[b])): float(c) for a, b, c in zip(ii, jj, cc)}
    e_sub_now = float(sub_lin @ xf[sel])
    if cc.size:
        e_sub_now += float(np.sum(cc * xf[ii] * xf[jj]))
    return QuboProblem(n_vars=m, linear=sub_lin, quadratic=sub_quad,
                       offset=energy - e_sub_now)


def _impact_coupling_blocks(f: np.ndarray, indptr, indices, data, m: int) -> list[np.ndarray]:
    """Partition all variables into blocks of up to ``m``.

    Each block is seeded with the largest-impact uncovered variable (impact =
    |reduced linear coefficient| = |local field|) and grown by the variable
    most strongly coupled to the block so far. Growing along couplings keeps
    tightly bound variable groups (e.g. the K one-hot bits of one point)
    inside a single sub-QUBO, where the backend can actually rearrange them.
    """
    n = f.size
    impact = np.abs(f)
    abs_data = np.abs(data)
    covered = np.zeros(n, dtype=bool)
    blocks: list[np.ndarray] = []
    n_covered = 0
    while n_covered < n:
        seed_var = int(np.argmax(np.where(covered, -np.inf, impact)))
        block = [seed_var]
        covered[seed_var] = True
        n_covered += 1
        gains = np.zeros(n)
        sl = slice(indptr[seed_var], indptr[seed_var + 1])
        gains[indices[sl]] += abs_data[sl]
        while len(block) < m and n_covered < n:
            masked = np.where(covered, -np.inf, gains)
            cand = int(np.argmax(masked))
            if masked[cand] <= 0.0:  # nothing coupled: fall back to impact
                cand = int(np.argmax(np.where(covered, -np.inf, impact)))
            block.append(cand)
            covered[cand] = True
            n_covered += 1
            sl = slice(indptr[cand], indptr[cand + 1])
            gains[indices[sl]] += abs_data[sl]
        blocks.append(np.sort(np.array(block, dtype=np.int64)))
    return blocks


def decompose_solve(problem: QuboProblem, config: DecompositionConfig) -> SolveReport:
    """Split/stitch minimization for QUBOs too large to attack whole.

    Keeps a full incumbent state. Each round partitions the variables into
    ``subqubo_size`` blocks (impact-seeded, coupling-grown; see
    :func:`_impact_coupling_blocks`) and solves every block's clamped
    sub-QUBO with the backend, warm-started from the incumbent; a stitched
    state is accepted if the full energy does not increase. The energy after
    each round lands in ``sample_energies``, so the trace is non-increasing.
    """
    if not isinstance(problem, QuboProblem):
        raise ConfigurationError("decompose_solve operates on QUBO problems")
    t0 = time.perf_counter()
    n = problem.n_vars
    m = min(config.subqubo_size, n)
    indptr, indices, data, lin, offset, _ = _problem_arrays(problem)
    terms = problem._terms

    rng = np.random.default_rng(np.random.SeedSequence([config.seed, _STREAM_DECOMP_START]))
    x = rng.integers(0, 2, size=n).astype(np.int8)
    energy = float(_batch_energies(problem, x[None, :])[0])

    history = np.empty(config.nrepeat, dtype=np.float64)
    for r in range(config.nrepeat):
        f = _kernels.local_fields(indptr, indices, data, lin, x)
        for b_idx, sel in enumerate(_impact_coupling_blocks(f, indptr, indices, data, m)):
            f = _kernels.local_fields(indptr, indices, data, lin, x)
            sub = _clamped_subproblem(problem, terms, f, x, energy, sel)
            round_seed = derive_seed(config.seed, _STREAM_DECOMP_ROUND, r, b_idx)
            report = _backend_solve(sub, config.backend, round_seed, x[sel].copy())
            if report.best_energy <= energy:
                x[sel] = report.best_state.astype(np.int8)
                energy = report.best_energy
        history[r] = energy

    echo = {"solver": "decomposition", "subqubo_size": config.subqubo_size,
            "nrepeat": config.nrepeat, "backend": config.backend, "seed": config.seed}
    return SolveReport(best_state=x, best_energy=float(history[-1]),
                       sample_energies=history, elapsed=_elapsed_since(t0),
                       config_echo=echo, seed=config.seed)


def solve_problem(problem: Problem, config: SolverConfig) -> SolveReport:
    """Dispatch on the config type; Ising problems route through an exact
    QUBO conversion when the solver is QUBO-only (decomposition)."""
    if isinstance(config, SaSchedule):
        return simulated_annealing(problem, config)
    if isinstance(config, TabuConfig):
        return tabu_search(problem, config)
    if isinstance(config, BruteForceConfig):
        return brute_force_minimize(problem)
    if isinstance(config, DecompositionConfig):
        if isinstance(problem, IsingProblem):
            report = decompose_solve(ising_to_qubo(problem), config)
            spins = (2 * report.best_state.astype(np.int8) - 1).astype(np.int8)
            return SolveReport(best_state=spins, best_energy=report.best_energy,
                               sample_energies=report.sample_energies,
                               elapsed=report.elapsed, config_echo=report.config_echo,
                               seed=report.seed)
        return decompose_solve(problem, config)
    raise ConfigurationError(f"unknown solver config {type(config).__name__}")
