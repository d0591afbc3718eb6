"""Command-line interface.

Subcommands: generate, build, solve, cluster, kmeans, benchmark. Every
stochastic subcommand takes ``--seed`` (default from QUBOCLUST_SEED, else 0)
and echoes it into its output files, which are deterministic given the seed;
wall-clock timings go to stdout only. Exit codes: 0 ok, 2 usage, 3 input,
4 configuration, 5 size limit, 6 degeneracy.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .baselines import KMeansConfig, inertia, kmeans, objective_w
from .datagen import BlobSpec, EllipseSpec, ellipse_uniform, gaussian_blobs, pedagogical_instance
from .errors import (ConfigurationError, DegeneracyError, DimensionError,
                     DomainError, SizeLimitError)
from .formulation import (OneHotConfig, build_binary_ising, build_onehot_qubo,
                          decode_onehot, ising_to_qubo, precision_check, resolve_lambda)
from .model import ClusterAssignment, Dataset, distance_matrix
from .pipelines import (BenchmarkSuite, DatasetJob, cluster_binary, cluster_hierarchical,
                        cluster_onehot, dataset_for_job, run_benchmark,
                        write_benchmark_csv, write_benchmark_summary, HierarchyConfig)
from .solvers import (BruteForceConfig, DecompositionConfig, SaSchedule, TabuConfig,
                      solve_problem)

EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_CONFIGURATION = 4
EXIT_SIZE_LIMIT = 5
EXIT_DEGENERACY = 6

SEED_ENV_VAR = "QUBOCLUST_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def _add_seed(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (default: ${SEED_ENV_VAR} or 0)")


def _resolve_seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("solver")
    g.add_argument("--solver", choices=("sa", "tabu", "decomposition", "brute_force"),
                   default="sa")
    g.add_argument("--samples", type=int, default=1000, help="SA chains (best-of)")
    g.add_argument("--sweeps", type=int, default=1000, help="SA sweeps per chain")
    g.add_argument("--t-initial", type=float, default=None)
    g.add_argument("--t-final", type=float, default=None)
    g.add_argument("--cooling", choices=("geometric", "linear"), default="geometric")
    g.add_argument("--tenure", type=int, default=None)
    g.add_argument("--max-iterations", type=int, default=1000)
    g.add_argument("--stall-limit", type=int, default=100)
    g.add_argument("--subqubo-size", type=int, default=50)
    g.add_argument("--nrepeat", type=int, default=50)
    g.add_argument("--backend", choices=("tabu", "simulated_annealing", "brute_force"),
                   default="tabu")


def _solver_config(args, seed: int):
    if args.solver == "sa":
        return SaSchedule(t_initial=args.t_initial, t_final=args.t_final,
                          sweeps=args.sweeps, cooling=args.cooling,
                          samples=args.samples, seed=seed)
    if args.solver == "tabu":
        return TabuConfig(tenure=args.tenure, max_iterations=args.max_iterations,
                          stall_limit=args.stall_limit, seed=seed)
    if args.solver == "decomposition":
        return DecompositionConfig(subqubo_size=args.subqubo_size, nrepeat=args.nrepeat,
                                   backend=args.backend, seed=seed)
    return BruteForceConfig(seed=seed)


def _load_dataset(path: str) -> Dataset:
    if not Path(path).exists():
        raise DomainError(f"input file not found: {path}")
    return io.load_points_csv(path)


def _write_assignment_json(path: str, assignment: ClusterAssignment, method: str,
                           energy: float | None, w: float | None, inertia_value: float | None,
                           violations: int, seed: int, config: dict) -> None:
    io.dump_json(path, {
        "labels": [int(v) for v in assignment.labels],
        "k": assignment.k,
        "method": method,
        "energy": energy,
        "w": w,
        "inertia": inertia_value,
        "violations": violations,
        "seed": seed,
        "config": config,
    })


def _maybe_plot(args, data: Dataset, labels: np.ndarray, title: str) -> None:
    if getattr(args, "plot", None):
        from .plots import save_assignment_figure
        if save_assignment_figure(args.plot, data, labels, title=title):
            print(f"wrote {args.plot}")
        else:
            print("plot skipped: data is not 2-D", file=sys.stderr)


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def _cmd_generate_blobs(args) -> int:
    seed = _resolve_seed(args)
    spec = BlobSpec(n_total=args.n, k_blobs=args.k, dims=args.dims, std=args.std,
                    allow_overlap=not args.no_overlap, seed=seed)
    data = gaussian_blobs(spec)
    io.save_points_csv(args.output, data)
    print(f"wrote {args.output}: {data.n} points, {data.dims}-D, "
          f"{args.k} blobs, seed {seed}")
    return 0


def _cmd_generate_ellipse(args) -> int:
    seed = _resolve_seed(args)
    spec = EllipseSpec(n_total=args.n, semi_axis_a=args.a, semi_axis_b=args.b,
                       rotation=args.rotation, center=(args.center_x, args.center_y),
                       seed=seed)
    data = ellipse_uniform(spec)
    io.save_points_csv(args.output, data)
    print(f"wrote {args.output}: {data.n} points inside {args.a}x{args.b} ellipse, seed {seed}")
    return 0


def _cmd_generate_pedagogical(args) -> int:
    data, centroids = pedagogical_instance()
    io.save_points_csv(args.output, data)
    centroids_out = args.centroids_out or str(Path(args.output).with_suffix("")) + "_centroids.csv"
    io.save_points_csv(centroids_out, Dataset(points=centroids))
    print(f"wrote {args.output} (12 points, 4 groups) and {centroids_out} "
          f"(adversarial k-means start)")
    return 0


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------

def _cmd_build_onehot(args) -> int:
    data = _load_dataset(args.points)
    d = distance_matrix(data, metric=args.metric, normalize=not args.no_normalize)
    lam = resolve_lambda(d, args.k, args.lambda_mode, args.lambda_value)
    problem = build_onehot_qubo(d, OneHotConfig(k=args.k, lambda_mode=args.lambda_mode,
                                                lambda_value=lam))
    io.save_qubo(args.output, problem)
    print(f"wrote {args.output}: {problem.n_vars} variables "
          f"({data.n} points x {args.k} clusters), lambda={lam}")
    if args.n_bits is not None:
        report = precision_check(d, args.k, args.n_bits)
        bound = "n/a" if report.d_bound is None else repr(report.d_bound)
        print(f"precision: n_bits={report.n_bits} d_bound={bound} "
              f"max_d={report.max_observed_d!r} feasible={report.feasible}")
    return 0


def _cmd_build_binary(args) -> int:
    data = _load_dataset(args.points)
    d = distance_matrix(data, metric=args.metric, normalize=not args.no_normalize)
    problem = ising_to_qubo(build_binary_ising(d))
    io.save_qubo(args.output, problem)
    print(f"wrote {args.output}: {problem.n_vars} variables, "
          f"{len(problem.quadratic)} couplings")
    return 0


# ---------------------------------------------------------------------------
# solve / cluster / kmeans
# ---------------------------------------------------------------------------

def _cmd_solve(args) -> int:
    if not Path(args.problem).exists():
        raise DomainError(f"input file not found: {args.problem}")
    problem = io.load_qubo(args.problem)
    seed = _resolve_seed(args)
    report = solve_problem(problem, _solver_config(args, seed))
    io.dump_json(args.output, {
        "n_vars": problem.n_vars,
        "best_state": [int(v) for v in report.best_state],
        "best_energy": report.best_energy,
        "sample_energies": [float(e) for e in report.sample_energies],
        "seed": seed,
        "config": report.config_echo,
    })
    print(f"wrote {args.output}: best energy {report.best_energy!r} "
          f"in {report.elapsed:.3f}s")
    return 0


def _cmd_cluster_onehot(args) -> int:
    data = _load_dataset(args.points)
    seed = _resolve_seed(args)
    solver = _solver_config(args, seed)
    assignment, report, violations = cluster_onehot(
        data, args.k, solver, lambda_mode=args.lambda_mode,
        explicit_lambda=args.lambda_value, metric=args.metric)
    d = distance_matrix(data, metric=args.metric, normalize=True)
    decode = "strict"
    if assignment is None:
        assignment = decode_onehot(report.best_state, data.n, args.k, policy="repair", d=d)
        decode = "repaired"
    config = dict(report.config_echo)
    config.update({"lambda_mode": args.lambda_mode, "metric": args.metric, "decode": decode})
    _write_assignment_json(args.output, assignment, "onehot", report.best_energy,
                           objective_w(d, assignment), inertia(data, assignment),
                           len(violations), seed, config)
    print(f"wrote {args.output}: energy {report.best_energy!r}, "
          f"{len(violations)} violations, {report.elapsed:.3f}s")
    _maybe_plot(args, data, assignment.labels, f"one-hot k={args.k}")
    return 0


def _cmd_cluster_binary(args) -> int:
    data = _load_dataset(args.points)
    seed = _resolve_seed(args)
    assignment, report = cluster_binary(data, _solver_config(args, seed), metric=args.metric)
    d = distance_matrix(data, metric=args.metric, normalize=True)
    config = dict(report.config_echo)
    config.update({"metric": args.metric})
    _write_assignment_json(args.output, assignment, "binary", report.best_energy,
                           objective_w(d, assignment), inertia(data, assignment),
                           0, seed, config)
    print(f"wrote {args.output}: energy {report.best_energy!r}, {report.elapsed:.3f}s")
    _maybe_plot(args, data, assignment.labels, "binary split")
    return 0


def _cmd_cluster_hierarchical(args) -> int:
    data = _load_dataset(args.points)
    seed = _resolve_seed(args)
    config = HierarchyConfig(target_k=args.target_k, split_selection=args.split_selection,
                             solver=_solver_config(args, seed), metric=args.metric, seed=seed)
    assignment, history = cluster_hierarchical(data, config)
    d = distance_matrix(data, metric=args.metric, normalize=True)
    echo = {"solver": "hierarchical", "split_selection": args.split_selection,
            "binary_solver": type(config.solver).__name__, "metric": args.metric,
            "splits": [{"split": h.split_index, "cluster": h.cluster,
                        "new_label": h.new_label, "n_points": len(h.point_indices)}
                       for h in history]}
    _write_assignment_json(args.output, assignment, "hierarchical", None,
                           objective_w(d, assignment), inertia(data, assignment),
                           0, seed, echo)
    print(f"wrote {args.output}: {len(history)} splits to k={args.target_k}")
    _maybe_plot(args, data, assignment.labels, f"hierarchical k={args.target_k}")
    return 0


def _cmd_kmeans(args) -> int:
    data = _load_dataset(args.points)
    seed = _resolve_seed(args)
    init = "kmeans_pp" if args.init == "kmeans++" else args.init
    config = KMeansConfig(k=args.k, init=init, n_init=args.n_init,
                          max_iterations=args.max_iterations, tol=args.tol, seed=seed)
    result = kmeans(data, config)
    d = distance_matrix(data, metric=args.metric, normalize=True)
    method = "kmeans_pp" if init == "kmeans_pp" else "kmeans_random"
    echo = {"solver": "kmeans", "init": init, "n_init": args.n_init,
            "max_iterations": args.max_iterations, "tol": args.tol,
            "coordinates": "raw", "iterations_run": result.iterations_run}
    _write_assignment_json(args.output, result.assignment, method, None,
                           objective_w(d, result.assignment), result.inertia,
                           0, seed, echo)
    print(f"wrote {args.output}: inertia {result.inertia!r} "
          f"({result.iterations_run} iterations)")
    _maybe_plot(args, data, result.assignment.labels, f"k-means k={args.k}")
    return 0


# ---------------------------------------------------------------------------
# benchmark
# ---------------------------------------------------------------------------

def _suite_for(args, seed: int) -> BenchmarkSuite:
    if args.suite == "table1":
        sizes = args.sizes or [200]
        jobs = tuple(DatasetJob(tag=f"blobs_n{n}", kind="blobs",
                                spec=BlobSpec(n_total=n, k_blobs=6, std=1.0, seed=seed),
                                k=6) for n in sizes)
        return BenchmarkSuite(jobs=jobs, methods=("kmeans_pp", "kmeans_random", "onehot"),
                              onehot_solver=DecompositionConfig(subqubo_size=args.subqubo_size,
                                                                nrepeat=args.nrepeat),
                              seed=seed)
    if args.suite == "table2":
        sizes = args.sizes or [40, 1000]
        jobs = tuple(DatasetJob(tag=f"ellipse_n{n}", kind="ellipse",
                                spec=EllipseSpec(n_total=n, semi_axis_a=4.0, semi_axis_b=1.0,
                                                 seed=seed),
                                k=2) for n in sizes)
        return BenchmarkSuite(jobs=jobs, methods=("kmeans_pp", "kmeans_random", "binary"),
                              binary_solver=DecompositionConfig(subqubo_size=args.subqubo_size,
                                                                nrepeat=args.nrepeat),
                              seed=seed)
    if args.suite == "fig3":
        sizes = args.sizes or [200]
        jobs = tuple(DatasetJob(tag=f"blobs_n{n}", kind="blobs",
                                spec=BlobSpec(n_total=n, k_blobs=6, std=1.0, seed=seed),
                                k=6) for n in sizes)
        return BenchmarkSuite(jobs=jobs, methods=("kmeans_pp", "onehot"),
                              onehot_solver=DecompositionConfig(subqubo_size=args.subqubo_size,
                                                                nrepeat=args.nrepeat),
                              nrepeat_sweep=tuple(args.nrepeats or (1, 5, 10, 25, 50)),
                              seed=seed)
    raise ConfigurationError(f"unknown suite {args.suite!r}")


def _render_benchmark_figures(out_dir: Path, suite: BenchmarkSuite, records) -> None:
    from .plots import save_assignment_figure, save_sweep_figure
    datasets = {job.tag: dataset_for_job(job) for job in suite.jobs}
    for r in records:
        if r.status != "ok" or r.labels is None:
            continue
        suffix = f"_nrepeat{r.nrepeat}" if r.nrepeat is not None else ""
        name = f"{r.dataset_tag}_{r.method}{suffix}.png"
        save_assignment_figure(out_dir / name, datasets[r.dataset_tag], r.labels,
                               title=f"{r.dataset_tag} / {r.method}{suffix}")
    if suite.nrepeat_sweep:
        for job in suite.jobs:
            sweep = [(r.nrepeat, r.inertia) for r in records
                     if r.dataset_tag == job.tag and r.method == "onehot"
                     and r.status == "ok" and r.nrepeat is not None]
            if not sweep:
                continue
            sweep.sort()
            reference = next((r.inertia for r in records
                              if r.dataset_tag == job.tag and r.method == "kmeans_pp"
                              and r.status == "ok"), None)
            save_sweep_figure(out_dir / f"{job.tag}_sweep.png",
                              [s[0] for s in sweep], [s[1] for s in sweep],
                              reference=reference,
                              title=f"{job.tag}: quality vs nrepeat")


def _cmd_benchmark(args) -> int:
    seed = _resolve_seed(args)
    suite = _suite_for(args, seed)
    records = run_benchmark(suite, threads=args.threads)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_benchmark_csv(out_dir / "benchmark.csv", records)
    write_benchmark_summary(out_dir / "summary.json", records, seed)
    for r in records:
        sweep = f" nrepeat={r.nrepeat}" if r.nrepeat is not None else ""
        if r.status == "ok":
            print(f"{r.dataset_tag} {r.method}{sweep}: inertia={r.inertia!r} w={r.w!r} "
                  f"violations={r.violations} ({r.elapsed:.2f}s)")
        else:
            print(f"{r.dataset_tag} {r.method}{sweep}: FAILED ({r.error})")
    if not args.no_plots:
        _render_benchmark_figures(out_dir, suite, records)
    print(f"wrote {out_dir / 'benchmark.csv'} and {out_dir / 'summary.json'}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quboclust",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write synthetic datasets")
    gen_sub = gen.add_subparsers(dest="generator", required=True)

    blobs = gen_sub.add_parser("blobs", help="Gaussian blobs on a lattice")
    blobs.add_argument("--n", type=int, required=True)
    blobs.add_argument("--k", type=int, required=True)
    blobs.add_argument("--dims", type=int, default=2)
    blobs.add_argument("--std", type=float, default=1.0)
    blobs.add_argument("--no-overlap", action="store_true",
                       help="widen lattice spacing so blobs stay separated")
    blobs.add_argument("-o", "--output", required=True)
    _add_seed(blobs)
    blobs.set_defaults(func=_cmd_generate_blobs)

    ellipse = gen_sub.add_parser("ellipse", help="uniform points inside an ellipse")
    ellipse.add_argument("--n", type=int, required=True)
    ellipse.add_argument("--a", type=float, default=1.0, help="major semi-axis")
    ellipse.add_argument("--b", type=float, default=1.0, help="minor semi-axis")
    ellipse.add_argument("--rotation", type=float, default=0.0, help="radians")
    ellipse.add_argument("--center-x", type=float, default=0.0)
    ellipse.add_argument("--center-y", type=float, default=0.0)
    ellipse.add_argument("-o", "--output", required=True)
    _add_seed(ellipse)
    ellipse.set_defaults(func=_cmd_generate_ellipse)

    ped = gen_sub.add_parser("pedagogical",
                             help="fixed 12-point instance + adversarial centroids")
    ped.add_argument("-o", "--output", required=True)
    ped.add_argument("--centroids-out", default=None)
    ped.set_defaults(func=_cmd_generate_pedagogical)

    build = sub.add_parser("build", help="build QUBO files from points")
    build_sub = build.add_subparsers(dest="encoding", required=True)

    onehot = build_sub.add_parser("onehot", help="one-hot K-cluster QUBO")
    onehot.add_argument("points")
    onehot.add_argument("--k", type=int, required=True)
    onehot.add_argument("--lambda-mode", choices=("paper_bound", "paper_practice", "explicit"),
                        default="paper_bound")
    onehot.add_argument("--lambda-value", type=float, default=None)
    onehot.add_argument("--metric", choices=("squared_euclidean", "euclidean"),
                        default="squared_euclidean")
    onehot.add_argument("--no-normalize", action="store_true")
    onehot.add_argument("--n-bits", type=int, default=None,
                        help="also print the hardware precision report")
    onehot.add_argument("-o", "--output", required=True)
    onehot.set_defaults(func=_cmd_build_onehot)

    binary = build_sub.add_parser("binary", help="2-cluster problem in QUBO form")
    binary.add_argument("points")
    binary.add_argument("--metric", choices=("squared_euclidean", "euclidean"),
                        default="squared_euclidean")
    binary.add_argument("--no-normalize", action="store_true")
    binary.add_argument("-o", "--output", required=True)
    binary.set_defaults(func=_cmd_build_binary)

    solve = sub.add_parser("solve", help="minimize a QUBO file")
    solve.add_argument("problem")
    solve.add_argument("-o", "--output", required=True)
    _add_solver_flags(solve)
    _add_seed(solve)
    solve.set_defaults(func=_cmd_solve)

    cluster = sub.add_parser("cluster", help="end-to-end clustering pipelines")
    cluster_sub = cluster.add_subparsers(dest="pipeline", required=True)

    c_onehot = cluster_sub.add_parser("onehot")
    c_onehot.add_argument("points")
    c_onehot.add_argument("--k", type=int, required=True)
    c_onehot.add_argument("--lambda-mode",
                          choices=("paper_bound", "paper_practice", "explicit"),
                          default="paper_bound")
    c_onehot.add_argument("--lambda-value", type=float, default=None)
    c_onehot.add_argument("--metric", choices=("squared_euclidean", "euclidean"),
                          default="squared_euclidean")
    c_onehot.add_argument("-o", "--output", required=True)
    c_onehot.add_argument("--plot", default=None, help="also write a scatter PNG")
    _add_solver_flags(c_onehot)
    _add_seed(c_onehot)
    c_onehot.set_defaults(func=_cmd_cluster_onehot)

    c_binary = cluster_sub.add_parser("binary")
    c_binary.add_argument("points")
    c_binary.add_argument("--metric", choices=("squared_euclidean", "euclidean"),
                          default="squared_euclidean")
    c_binary.add_argument("-o", "--output", required=True)
    c_binary.add_argument("--plot", default=None)
    _add_solver_flags(c_binary)
    _add_seed(c_binary)
    c_binary.set_defaults(func=_cmd_cluster_binary)

    c_hier = cluster_sub.add_parser("hierarchical")
    c_hier.add_argument("points")
    c_hier.add_argument("--target-k", type=int, required=True)
    c_hier.add_argument("--split-selection",
                        choices=("largest_w_contribution", "largest_cluster"),
                        default="largest_w_contribution")
    c_hier.add_argument("--metric", choices=("squared_euclidean", "euclidean"),
                        default="squared_euclidean")
    c_hier.add_argument("-o", "--output", required=True)
    c_hier.add_argument("--plot", default=None)
    _add_solver_flags(c_hier)
    _add_seed(c_hier)
    c_hier.set_defaults(func=_cmd_cluster_hierarchical)

    km = sub.add_parser("kmeans", help="k-means baseline")
    km.add_argument("points")
    km.add_argument("--k", type=int, required=True)
    km.add_argument("--init", choices=("kmeans++", "kmeans_pp", "random"), default="kmeans++")
    km.add_argument("--n-init", type=int, default=10)
    km.add_argument("--max-iterations", type=int, default=300)
    km.add_argument("--tol", type=float, default=1e-4)
    km.add_argument("--metric", choices=("squared_euclidean", "euclidean"),
                    default="squared_euclidean")
    km.add_argument("-o", "--output", required=True)
    km.add_argument("--plot", default=None)
    _add_seed(km)
    km.set_defaults(func=_cmd_kmeans)

    bench = sub.add_parser("benchmark", help="run a named comparison suite")
    bench.add_argument("--suite", choices=("table1", "table2", "fig3"), required=True)
    bench.add_argument("--sizes", type=int, nargs="+", default=None,
                       help="dataset sizes (suite-specific defaults)")
    bench.add_argument("--nrepeats", type=int, nargs="+", default=None,
                       help="sweep values for the fig3 suite")
    bench.add_argument("--subqubo-size", type=int, default=50)
    bench.add_argument("--nrepeat", type=int, default=50)
    bench.add_argument("--threads", type=int, default=1,
                       help="benchmark cell concurrency (0 = auto)")
    bench.add_argument("--no-plots", action="store_true")
    bench.add_argument("--out-dir", required=True)
    _add_seed(bench)
    bench.set_defaults(func=_cmd_benchmark)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, DimensionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIGURATION
    except SizeLimitError as exc:
        print(f"size limit: {exc}", file=sys.stderr)
        return EXIT_SIZE_LIMIT
    except DegeneracyError as exc:
        print(f"degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERACY


if __name__ == "__main__":
    sys.exit(main())
