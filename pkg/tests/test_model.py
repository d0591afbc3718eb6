import numpy as np
import pytest

from quboclust import (ClusterAssignment, Dataset, DimensionError, DistanceMatrix,
                       DomainError, IsingProblem, QuboProblem, distance_matrix,
                       ising_energy, qubo_energy)


class TestDataset:
    def test_basic_shape(self):
        ds = Dataset(points=[[0.0, 1.0], [2.0, 3.0]])
        assert ds.n == 2 and ds.dims == 2

    def test_true_labels_length_checked(self):
        with pytest.raises(DimensionError):
            Dataset(points=[[0.0], [1.0]], true_labels=[0])

    def test_nonfinite_rejected(self):
        with pytest.raises(DomainError):
            Dataset(points=[[np.nan, 0.0]])

    def test_empty_rejected(self):
        with pytest.raises(DimensionError):
            Dataset(points=np.empty((0, 2)))


class TestDistanceMatrix:
    def test_euclidean_345(self):
        d = distance_matrix(Dataset(points=[[0.0, 0.0], [3.0, 4.0]]), metric="euclidean")
        assert d.d[0, 1] == 5.0

    def test_squared_euclidean_345(self):
        d = distance_matrix(Dataset(points=[[0.0, 0.0], [3.0, 4.0]]),
                            metric="squared_euclidean")
        assert d.d[0, 1] == 25.0

    def test_normalized_max_is_one(self):
        ds = Dataset(points=[[0.0, 0.0], [1.0, 2.0], [-3.0, 0.5]])
        d = distance_matrix(ds, normalize=True)
        assert d.normalized
        assert d.max_entry == 1.0
        assert d.d_max > 0

    def test_coincident_points_skip_normalization(self):
        ds = Dataset(points=[[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]])
        d = distance_matrix(ds, normalize=True)
        assert not d.normalized
        assert d.d_max == 0.0
        assert np.all(d.d == 0.0)

    def test_unknown_metric(self):
        with pytest.raises(DomainError):
            distance_matrix(Dataset(points=[[0.0]]), metric="manhattan")

    @pytest.mark.parametrize("seed", range(10))
    def test_symmetry_and_zero_diagonal_random(self, seed):
        rng = np.random.default_rng(seed)
        ds = Dataset(points=rng.normal(size=(rng.integers(2, 20), rng.integers(1, 5))))
        for metric in ("euclidean", "squared_euclidean"):
            d = distance_matrix(ds, metric=metric, normalize=bool(seed % 2))
            assert np.array_equal(d.d, d.d.T)
            assert np.all(np.diag(d.d) == 0.0)
            assert np.all(d.d >= 0.0)

    def test_validation_rejects_asymmetry(self):
        with pytest.raises(DomainError):
            DistanceMatrix(n=2, d=np.array([[0.0, 1.0], [2.0, 0.0]]))


class TestQuboEnergy:
    def test_single_linear_term(self):
        p = QuboProblem(n_vars=1, linear=[2.0])
        assert qubo_energy(p, [1]) == 2.0

    def test_all_zeros_gives_offset(self):
        p = QuboProblem(n_vars=3, linear=[1.0, -2.0, 0.5],
                        quadratic={(0, 1): 4.0, (1, 2): -1.0}, offset=7.25)
        assert qubo_energy(p, [0, 0, 0]) == 7.25

    def test_single_coupling(self):
        p = QuboProblem(n_vars=2, linear=[0.0, 0.0], quadratic={(0, 1): 3.0})
        assert qubo_energy(p, [1, 1]) == 3.0

    def test_length_mismatch(self):
        p = QuboProblem(n_vars=2, linear=[0.0, 0.0])
        with pytest.raises(DimensionError):
            qubo_energy(p, [1])

    def test_non_binary_entry(self):
        p = QuboProblem(n_vars=2, linear=[0.0, 0.0])
        with pytest.raises(DomainError):
            qubo_energy(p, [1, 2])

    def test_bad_quadratic_keys(self):
        with pytest.raises(DimensionError):
            QuboProblem(n_vars=2, linear=[0.0, 0.0], quadratic={(1, 0): 1.0})
        with pytest.raises(DimensionError):
            QuboProblem(n_vars=2, linear=[0.0, 0.0], quadratic={(0, 2): 1.0})


class TestIsingEnergy:
    def test_single_bias(self):
        p = IsingProblem(n_vars=1, h=[1.0])
        assert ising_energy(p, [-1]) == -1.0

    def test_single_coupling(self):
        p = IsingProblem(n_vars=2, h=[0.0, 0.0], J={(0, 1): 5.0})
        assert ising_energy(p, [1, -1]) == -5.0

    def test_frustrated_triangle_minimum(self):
        p = IsingProblem(n_vars=3, h=np.zeros(3),
                         J={(0, 1): 1.0, (0, 2): 1.0, (1, 2): 1.0})
        energies = [ising_energy(p, [s0, s1, s2])
                    for s0 in (-1, 1) for s1 in (-1, 1) for s2 in (-1, 1)]
        assert min(energies) == -1.0

    def test_non_spin_entry(self):
        p = IsingProblem(n_vars=2, h=[0.0, 0.0])
        with pytest.raises(DomainError):
            ising_energy(p, [1, 0])


@pytest.mark.parametrize("seed", range(5))
def test_energy_linear_in_coefficients(seed):
    rng = np.random.default_rng(seed)
    n = 6
    lin = rng.normal(size=n)
    quad = {(i, j): float(rng.normal()) for i in range(n) for j in range(i + 1, n)
            if rng.random() < 0.6}
    off = float(rng.normal())
    c = 3.5
    p1 = QuboProblem(n_vars=n, linear=lin, quadratic=quad, offset=off)
    p2 = QuboProblem(n_vars=n, linear=c * lin,
                     quadratic={k: c * v for k, v in quad.items()}, offset=c * off)
    for _ in range(20):
        state = rng.integers(0, 2, size=n)
        assert qubo_energy(p2, state) == pytest.approx(c * qubo_energy(p1, state), abs=1e-12)


def test_cluster_assignment_validation():
    a = ClusterAssignment(labels=[0, 1, 0], k=3)
    assert a.n == 3
    assert a.has_empty_clusters  # cluster 2 unused but representable
    with pytest.raises(DomainError):
        ClusterAssignment(labels=[0, 3], k=3)
    with pytest.raises(DomainError):
        ClusterAssignment(labels=[-1, 0], k=2)
