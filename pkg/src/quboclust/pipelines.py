"""End-to-end clustering flows and the benchmark harness.

Flows normalize the distance matrix, build the encoding, solve, and decode.
The benchmark runs a grid of (dataset, method) cells, reporting both the
centroid-based inertia and the pairwise objective W for every cell: the
QUBO/Ising methods optimize W while k-means optimizes inertia, and keeping
both visible makes that metric mismatch explicit. k-means runs on raw
coordinates; only the distance matrices fed to the builders are normalized.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .baselines import KMeansConfig, inertia, kmeans, objective_w
from .datagen import BlobSpec, EllipseSpec, ellipse_uniform, gaussian_blobs, pedagogical_instance
from .errors import ConfigurationError, DegeneracyError, QuboClustError
from .formulation import (ConstraintViolation, OneHotConfig, build_binary_ising,
                          build_onehot_qubo, decode_binary, decode_onehot, resolve_lambda)
from .model import ClusterAssignment, Dataset, DistanceMatrix, SolveReport, distance_matrix
from .solvers import (DecompositionConfig, SaSchedule, SolverConfig, derive_seed,
                      solve_problem)

_STREAM_HIERARCHY_SPLIT = 5
_STREAM_BENCHMARK_CELL = 6

SPLIT_SELECTIONS = ("largest_w_contribution", "largest_cluster")
METHODS = ("kmeans_random", "kmeans_pp", "onehot", "binary", "hierarchical")


def cluster_onehot(data: Dataset, k: int, solver_config: SolverConfig,
                   lambda_mode: str = "paper_bound",
                   explicit_lambda: float | None = None,
                   metric: str = "squared_euclidean",
                   ) -> tuple[ClusterAssignment | None, SolveReport, list[ConstraintViolation]]:
    """Normalized distances -> penalty -> one-hot QUBO -> solve -> strict decode.

    Returns (assignment, report, []) on a valid one-hot state, otherwise
    (None, report, violations).
    """
    d = distance_matrix(data, metric=metric, normalize=True)
    lam = resolve_lambda(d, k, lambda_mode, explicit_lambda)
    problem = build_onehot_qubo(d, OneHotConfig(k=k, lambda_mode=lambda_mode, lambda_value=lam))
    report = solve_problem(problem, solver_config)
    decoded = decode_onehot(report.best_state, data.n, k, policy="strict")
    if isinstance(decoded, ClusterAssignment):
        return decoded, report, []
    return None, report, decoded


def cluster_binary(data: Dataset, solver_config: SolverConfig,
                   metric: str = "squared_euclidean",
                   ) -> tuple[ClusterAssignment, SolveReport]:
    """Normalized distances -> binary Ising -> solve -> sign decode."""
    d = distance_matrix(data, metric=metric, normalize=True)
    problem = build_binary_ising(d)
    report = solve_problem(problem, solver_config)
    return decode_binary(report.best_state), report


@dataclass(frozen=True)
class HierarchyConfig:
    """Recursive binary splitting down to ``target_k`` clusters."""

    target_k: int
    split_selection: str = "largest_w_contribution"
    solver: SolverConfig = field(default_factory=SaSchedule)
    metric: str = "squared_euclidean"
    seed: int = 0

    def __post_init__(self):
        if self.target_k < 2:
            raise ConfigurationError("target_k must be >= 2")
        if self.split_selection not in SPLIT_SELECTIONS:
            raise ConfigurationError(
                f"unknown split_selection {self.split_selection!r}; expected {SPLIT_SELECTIONS}")
        if self.seed < 0:
            raise ConfigurationError("seed must be nonnegative")


@dataclass(frozen=True, eq=False)
class SplitRecord:
    """One executed binary split of the divisive hierarchy."""

    split_index: int
    cluster: int
    point_indices: tuple[int, ...]
    new_label: int
    report: SolveReport
    sub_d_max: float
    w_after: float


def cluster_hierarchical(data: Dataset, config: HierarchyConfig
                         ) -> tuple[ClusterAssignment, list[SplitRecord]]:
    """Divisive clustering: repeatedly binary-split a selected cluster.

    The candidate order follows ``split_selection`` (ties -> lowest cluster
    index); each split re-solves on the cluster's own renormalized distance
    matrix. A split that would leave one side empty is skipped and the next
    candidate tried; running out of candidates raises a degeneracy error
    carrying the partial result.
    """
    n = data.n
    if config.target_k > n:
        raise ConfigurationError(f"target_k={config.target_k} exceeds {n} points")
    d_full = distance_matrix(data, metric=config.metric, normalize=True)
    labels = np.zeros(n, dtype=np.int64)
    n_clusters = 1
    history: list[SplitRecord] = []
    for split in range(config.target_k - 1):
        candidates = []
        for a in range(n_clusters):
            member_idx = np.flatnonzero(labels == a)
            if member_idx.size < 2:
                continue
            if config.split_selection == "largest_cluster":
                key = float(member_idx.size)
            else:
                block = d_full.d[np.ix_(member_idx, member_idx)]
                key = 0.5 * float(block.sum())
            candidates.append((-key, a, member_idx))
        candidates.sort(key=lambda c: (c[0], c[1]))
        executed = False
        for attempt, (_, a, member_idx) in enumerate(candidates):
            sub_data = Dataset(points=data.points[member_idx])
            sub_solver = replace(
                config.solver,
                seed=derive_seed(config.seed, _STREAM_HIERARCHY_SPLIT, split, attempt))
            sub_assignment, report = cluster_binary(sub_data, sub_solver, metric=config.metric)
            sides = sub_assignment.labels
            if sides.min() == sides.max():
                continue  # one side empty: leave unsplit, try next candidate
            new_label = n_clusters
            labels[member_idx[sides == 1]] = new_label
            n_clusters += 1
            w_after = objective_w(d_full, ClusterAssignment(labels=labels.copy(), k=n_clusters))
            sub_d_max = distance_matrix(sub_data, metric=config.metric).d_max
            history.append(SplitRecord(split_index=split, cluster=a,
                                       point_indices=tuple(int(i) for i in member_idx),
                                       new_label=new_label, report=report,
                                       sub_d_max=sub_d_max, w_after=w_after))
            executed = True
            break
        if not executed:
            partial = ClusterAssignment(labels=labels, k=max(n_clusters, 2),
                                        source_tag="hierarchical_partial")
            raise DegeneracyError(
                f"no splittable cluster at {n_clusters} of {config.target_k} clusters",
                partial=(partial, history))
    final = ClusterAssignment(labels=labels, k=config.target_k, source_tag="hierarchical")
    return final, history


# ---------------------------------------------------------------------------
# Benchmark harness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetJob:
    """One dataset cell source: a generator spec plus the target k."""

    tag: str
    kind: str  # "blobs" | "ellipse" | "pedagogical"
    spec: BlobSpec | EllipseSpec | None
    k: int

    def __post_init__(self):
        if self.kind not in ("blobs", "ellipse", "pedagogical"):
            raise ConfigurationError(f"unknown dataset kind {self.kind!r}")
        if self.k < 2:
            raise ConfigurationError("k must be >= 2")


@dataclass(frozen=True)
class BenchmarkSuite:
    """Everything needed to reproduce a benchmark grid bit-for-bit."""

    jobs: tuple[DatasetJob, ...]
    methods: tuple[str, ...]
    onehot_solver: SolverConfig = field(default_factory=DecompositionConfig)
    binary_solver: SolverConfig = field(default_factory=DecompositionConfig)
    nrepeat_sweep: tuple[int, ...] | None = None
    lambda_mode: str = "paper_bound"
    metric: str = "squared_euclidean"
    n_init: int = 10
    seed: int = 0

    def __post_init__(self):
        for m in self.methods:
            if m not in METHODS:
                raise ConfigurationError(f"unknown method {m!r}; expected one of {METHODS}")


@dataclass(frozen=True, eq=False)
class BenchmarkRecord:
    """One (dataset, method) cell; ``labels`` feed the figures, not the CSV."""

    dataset_tag: str
    n: int
    k: int
    method: str
    inertia: float
    w: float
    violations: int
    elapsed: float
    solver_config_echo: dict
    nrepeat: int | None = None
    status: str = "ok"
    error: str = ""
    labels: np.ndarray | None = None


def dataset_for_job(job: DatasetJob) -> Dataset:
    if job.kind == "blobs":
        return gaussian_blobs(job.spec)
    if job.kind == "ellipse":
        return ellipse_uniform(job.spec)
    return pedagogical_instance()[0]


def _cell_metrics(data: Dataset, d_norm: DistanceMatrix,
                  assignment: ClusterAssignment) -> tuple[float, float]:
    return inertia(data, assignment), objective_w(d_norm, assignment)


def _run_cell(suite: BenchmarkSuite, job: DatasetJob, data: Dataset,
              d_norm: DistanceMatrix, method: str, cell_seed: int,
              nrepeat: int | None) -> BenchmarkRecord:
    t0 = time.perf_counter()
    try:
        violations = 0
        if method in ("kmeans_random", "kmeans_pp"):
            init = "random" if method == "kmeans_random" else "kmeans_pp"
            result = kmeans(data, KMeansConfig(k=job.k, init=init, n_init=suite.n_init,
                                               seed=cell_seed))
            assignment = result.assignment
            echo = {"solver": "kmeans", "init": init, "n_init": suite.n_init,
                    "coordinates": "raw", "seed": cell_seed}
            cell_k = job.k
        elif method == "onehot":
            solver = replace(suite.onehot_solver, seed=cell_seed)
            if nrepeat is not None:
                solver = replace(solver, nrepeat=nrepeat)
            assignment, report, viols = cluster_onehot(
                data, job.k, solver, lambda_mode=suite.lambda_mode, metric=suite.metric)
            if assignment is None:
                # Invalid one-hot state: report metrics for the repaired
                # assignment and keep the violation count visible.
                violations = len(viols)
                assignment = decode_onehot(report.best_state, data.n, job.k,
                                           policy="repair", d=d_norm)
            echo = report.config_echo
            cell_k = job.k
        elif method == "binary":
            solver = replace(suite.binary_solver, seed=cell_seed)
            assignment, report = cluster_binary(data, solver, metric=suite.metric)
            echo = report.config_echo
            cell_k = 2
        elif method == "hierarchical":
            config = HierarchyConfig(target_k=job.k, solver=suite.binary_solver,
                                     metric=suite.metric, seed=cell_seed)
            assignment, _ = cluster_hierarchical(data, config)
            echo = {"solver": "hierarchical",
                    "split_selection": config.split_selection,
                    "binary_solver": type(suite.binary_solver).__name__,
                    "seed": cell_seed}
            cell_k = job.k
        else:
            raise ConfigurationError(f"unknown method {method!r}")
        cell_inertia, cell_w = _cell_metrics(data, d_norm, assignment)
        return BenchmarkRecord(dataset_tag=job.tag, n=data.n, k=cell_k, method=method,
                               inertia=cell_inertia, w=cell_w, violations=violations,
                               elapsed=time.perf_counter() - t0,
                               solver_config_echo=echo, nrepeat=nrepeat,
                               labels=assignment.labels)
    except QuboClustError as exc:
        return BenchmarkRecord(dataset_tag=job.tag, n=data.n, k=job.k, method=method,
                               inertia=math.nan, w=math.nan, violations=0,
                               elapsed=time.perf_counter() - t0,
                               solver_config_echo={}, nrepeat=nrepeat,
                               status="failed", error=str(exc))


def run_benchmark(suite: BenchmarkSuite, threads: int = 1) -> list[BenchmarkRecord]:
    """Run every (dataset, method) cell; failures become failed records.

    With a sweep configured, the one-hot method emits one record per nrepeat
    value (the solver must be the decomposition solver). Cell RNG streams
    derive from (suite seed, job index, method index, sweep index), so record
    contents do not depend on the execution order or on ``threads``.
    """
    cells = []
    for job_idx, job in enumerate(suite.jobs):
        data = dataset_for_job(job)
        d_norm = distance_matrix(data, metric=suite.metric, normalize=True)
        for m_idx, method in enumerate(suite.methods):
            sweep: tuple[int | None, ...] = (None,)
            if method == "onehot" and suite.nrepeat_sweep:
                if not isinstance(suite.onehot_solver, DecompositionConfig):
                    raise ConfigurationError("nrepeat sweep requires the decomposition solver")
                sweep = tuple(suite.nrepeat_sweep)
            for s_idx, nrepeat in enumerate(sweep):
                cell_seed = derive_seed(suite.seed, _STREAM_BENCHMARK_CELL,
                                        job_idx, m_idx, s_idx)
                cells.append((suite, job, data, d_norm, method, cell_seed, nrepeat))
    if threads == 1:
        return [_run_cell(*cell) for cell in cells]
    with ThreadPoolExecutor(max_workers=threads if threads > 0 else None) as pool:
        futures = [pool.submit(_run_cell, *cell) for cell in cells]
        return [f.result() for f in futures]


BENCHMARK_COLUMNS = ("dataset_tag", "n", "k", "method", "nrepeat", "inertia", "w",
                     "violations", "elapsed_s", "status", "error", "solver_config")


def _fmt_float(v: float) -> str:
    return "" if math.isnan(v) else repr(float(v))


def write_benchmark_csv(path: str | Path, records: list[BenchmarkRecord]) -> None:
    """Fixed-order CSV, one row per record. ``elapsed_s`` is wall-clock and
    is the only column that varies between identically-seeded runs."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCHMARK_COLUMNS)
        for r in records:
            writer.writerow([
                r.dataset_tag, r.n, r.k, r.method,
                "" if r.nrepeat is None else r.nrepeat,
                _fmt_float(r.inertia), _fmt_float(r.w), r.violations,
                repr(float(r.elapsed)), r.status, r.error,
                json.dumps(r.solver_config_echo, sort_keys=True),
            ])


def write_benchmark_summary(path: str | Path, records: list[BenchmarkRecord],
                            suite_seed: int) -> None:
    """Per-method aggregates over successful cells; no timing, so the file is
    byte-identical across identically-seeded runs."""
    methods: dict[str, dict] = {}
    for r in records:
        agg = methods.setdefault(r.method, {"cells": 0, "failed": 0, "inertia": [],
                                            "w": [], "violations": 0})
        agg["cells"] += 1
        if r.status != "ok":
            agg["failed"] += 1
            continue
        agg["inertia"].append(r.inertia)
        agg["w"].append(r.w)
        agg["violations"] += r.violations
    summary = {"seed": suite_seed, "methods": {}}
    for method, agg in sorted(methods.items()):
        ok_inertia, ok_w = agg["inertia"], agg["w"]
        summary["methods"][method] = {
            "cells": agg["cells"],
            "failed": agg["failed"],
            "mean_inertia": float(np.mean(ok_inertia)) if ok_inertia else None,
            "min_inertia": float(np.min(ok_inertia)) if ok_inertia else None,
            "mean_w": float(np.mean(ok_w)) if ok_w else None,
            "min_w": float(np.min(ok_w)) if ok_w else None,
            "total_violations": agg["violations"],
        }
    Path(path).write_text(
        json.dumps(summary, sort_keys=True, indent=2, separators=(",", ": ")) + "\n")
