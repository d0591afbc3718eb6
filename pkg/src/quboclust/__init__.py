"""Combinatorial clustering as QUBO/Ising optimization.

Builds one-hot K-cluster QUBOs and constraint-free binary-clustering Ising
models from pairwise dissimilarities, minimizes them with classical
annealing-style metaheuristics (plus exhaustive oracles), and benchmarks the
results against a built-in k-means baseline.
"""

from .baselines import (KMeansConfig, KMeansResult, inertia, kmeans,
                        kmeans_with_explicit_init, objective_w)
from .datagen import (BlobSpec, EllipseSpec, ellipse_uniform, gaussian_blobs,
                      pedagogical_instance)
from .errors import (ConfigurationError, DegeneracyError, DimensionError,
                     DomainError, QuboClustError, SizeLimitError)
from .formulation import (ConstraintViolation, OneHotConfig, PrecisionReport,
                          build_binary_ising, build_onehot_qubo, decode_binary,
                          decode_onehot, ising_to_qubo, precision_check,
                          qubo_to_ising, resolve_lambda)
from .model import (ClusterAssignment, Dataset, DistanceMatrix, IsingProblem,
                    QuboProblem, SolveReport, distance_matrix, ising_energy,
                    qubo_energy)
from .pipelines import (BenchmarkRecord, BenchmarkSuite, DatasetJob,
                        HierarchyConfig, SplitRecord, cluster_binary,
                        cluster_hierarchical, cluster_onehot, run_benchmark,
                        write_benchmark_csv, write_benchmark_summary)
from .solvers import (BruteForceConfig, DecompositionConfig, SaSchedule,
                      TabuConfig, brute_force_clustering, brute_force_minimize,
                      count_assignments, decompose_solve, enumerate_energies,
                      enumerate_partitions, simulated_annealing, solve_problem,
                      tabu_search)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkRecord", "BenchmarkSuite", "BlobSpec", "BruteForceConfig",
    "ClusterAssignment", "ConfigurationError", "ConstraintViolation",
    "Dataset", "DatasetJob", "DecompositionConfig", "DegeneracyError",
    "DimensionError", "DistanceMatrix", "DomainError", "EllipseSpec",
    "HierarchyConfig", "IsingProblem", "KMeansConfig", "KMeansResult",
    "OneHotConfig", "PrecisionReport", "QuboClustError", "QuboProblem",
    "SaSchedule", "SizeLimitError", "SolveReport", "SplitRecord", "TabuConfig",
    "brute_force_clustering", "brute_force_minimize", "build_binary_ising",
    "build_onehot_qubo", "cluster_binary", "cluster_hierarchical",
    "cluster_onehot", "count_assignments", "decode_binary", "decode_onehot",
    "decompose_solve", "distance_matrix", "ellipse_uniform",
    "enumerate_energies", "enumerate_partitions", "gaussian_blobs", "inertia",
    "ising_energy", "ising_to_qubo", "kmeans", "kmeans_with_explicit_init",
    "objective_w", "pedagogical_instance", "precision_check", "qubo_energy",
    "qubo_to_ising", "resolve_lambda", "run_benchmark", "simulated_annealing",
    "solve_problem", "tabu_search", "write_benchmark_csv",
    "write_benchmark_summary",
]
