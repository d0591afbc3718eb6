import numpy as np
import pytest

from quboclust import (ClusterAssignment, ConfigurationError, Dataset,
                       DistanceMatrix, OneHotConfig, build_binary_ising,
                       build_onehot_qubo, decode_binary, decode_onehot,
                       distance_matrix, enumerate_energies, enumerate_partitions,
                       ising_energy, ising_to_qubo, objective_w, precision_check,
                       qubo_energy, qubo_to_ising, resolve_lambda)
from quboclust.errors import DimensionError, DomainError
from quboclust.solvers import _states_from_indices


def _random_distance_matrix(n, seed, normalize=True):
    rng = np.random.default_rng(seed)
    return distance_matrix(Dataset(points=rng.normal(size=(n, 2))),
                           metric="squared_euclidean", normalize=normalize)


def _onehot_state(labels, k):
    state = np.zeros(len(labels) * k, dtype=np.int8)
    for i, a in enumerate(labels):
        state[i * k + a] = 1
    return state


class TestResolveLambda:
    def test_paper_bound(self):
        d = DistanceMatrix(n=10, d=np.where(~np.eye(10, dtype=bool), 1.0, 0.0),
                           normalized=True, d_max=1.0)
        assert resolve_lambda(d, 2, "paper_bound") == 8.0

    def test_paper_practice_is_n(self):
        d = _random_distance_matrix(200, seed=0)
        assert resolve_lambda(d, 6, "paper_practice") == 200.0

    def test_degenerate_floor(self):
        # all points identical: the bound would be 0, floored to 1
        d = distance_matrix(Dataset(points=np.ones((5, 2))), normalize=True)
        assert resolve_lambda(d, 3, "paper_bound") == 1.0

    def test_paper_practice_requires_normalized(self):
        d = _random_distance_matrix(6, seed=1, normalize=False)
        with pytest.raises(ConfigurationError):
            resolve_lambda(d, 2, "paper_practice")

    def test_explicit_negative_rejected(self):
        d = _random_distance_matrix(6, seed=1)
        with pytest.raises(ConfigurationError):
            resolve_lambda(d, 2, "explicit", explicit_value=-1.0)
        # zero is allowed: it deliberately disables the constraint
        assert resolve_lambda(d, 2, "explicit", explicit_value=0.0) == 0.0

    def test_k_range_enforced(self):
        d = _random_distance_matrix(6, seed=1)
        with pytest.raises(ConfigurationError):
            resolve_lambda(d, 1, "paper_bound")
        with pytest.raises(ConfigurationError):
            resolve_lambda(d, 6, "paper_bound")


class TestBuildOneHot:
    def test_two_point_expansion(self):
        d = DistanceMatrix(n=2, d=np.array([[0.0, 1.0], [1.0, 0.0]]))
        q = build_onehot_qubo(d, OneHotConfig(k=2, lambda_mode="explicit", lambda_value=2.0))
        assert q.n_vars == 4
        assert q.linear.tolist() == [-2.0, -2.0, -2.0, -2.0]
        assert q.quadratic == {(0, 1): 4.0, (2, 3): 4.0, (0, 2): 1.0, (1, 3): 1.0}
        assert q.offset == 4.0
        assert q.var_labels == ((0, 0), (0, 1), (1, 0), (1, 1))

    @pytest.mark.parametrize("n,k,seed", [(4, 2, 0), (5, 2, 1), (6, 3, 2), (5, 3, 3)])
    def test_valid_state_energy_equals_w(self, n, k, seed):
        d = _random_distance_matrix(n, seed)
        lam = resolve_lambda(d, k, "paper_bound")
        q = build_onehot_qubo(d, OneHotConfig(k=k, lambda_mode="paper_bound",
                                              lambda_value=lam))
        for labels in enumerate_partitions(n, k):
            w = objective_w(d, ClusterAssignment(labels=np.array(labels), k=k))
            e = qubo_energy(q, _onehot_state(labels, k))
            assert e == pytest.approx(w, abs=1e-9)

    def test_all_zero_distances_ground_states(self):
        # N=3, K=2, all d=0, lambda=1: ground energy 0 attained by exactly
        # the 2^3 valid one-hot states among all 2^6
        d = DistanceMatrix(n=3, d=np.zeros((3, 3)))
        q = build_onehot_qubo(d, OneHotConfig(k=2, lambda_mode="explicit", lambda_value=1.0))
        energies = enumerate_energies(q)
        assert energies.min() == 0.0
        assert int(np.sum(energies == 0.0)) == 8

    def test_k_exceeding_n_rejected(self):
        d = _random_distance_matrix(3, seed=0)
        with pytest.raises(ConfigurationError):
            build_onehot_qubo(d, OneHotConfig(k=4, lambda_mode="explicit", lambda_value=1.0))


class TestBinaryIsing:
    def test_two_points(self):
        d = DistanceMatrix(n=2, d=np.array([[0.0, 5.0], [5.0, 0.0]]))
        p = build_binary_ising(d)
        assert p.J == {(0, 1): 5.0}
        assert np.all(p.h == 0.0) and p.offset == 0.0
        assert ising_energy(p, [1, -1]) == -5.0
        assert ising_energy(p, [-1, 1]) == -5.0

    def test_equilateral_frustration(self):
        d = DistanceMatrix(n=3, d=np.where(~np.eye(3, dtype=bool), 1.0, 0.0))
        p = build_binary_ising(d)
        assert enumerate_energies(p).min() == -1.0

    def test_all_zero_distances(self):
        d = DistanceMatrix(n=4, d=np.zeros((4, 4)))
        p = build_binary_ising(d)
        assert np.all(enumerate_energies(p) == 0.0)

    def test_single_point_rejected(self):
        with pytest.raises(ConfigurationError):
            build_binary_ising(DistanceMatrix(n=1, d=np.zeros((1, 1))))

    @pytest.mark.parametrize("seed", range(5))
    def test_flip_symmetry(self, seed):
        d = _random_distance_matrix(8, seed)
        p = build_binary_ising(d)
        energies = enumerate_energies(p)
        # global flip maps state index m to its bit complement
        flipped = energies[::-1]
        assert np.allclose(energies, flipped, atol=1e-12)


class TestQuboIsingTransform:
    def test_linear_only(self):
        from quboclust import QuboProblem
        p = qubo_to_ising(QuboProblem(n_vars=1, linear=[1.0]))
        assert p.h.tolist() == [0.5] and p.offset == 0.5 and p.J == {}

    def test_single_coupling(self):
        from quboclust import QuboProblem
        p = qubo_to_ising(QuboProblem(n_vars=2, linear=[0.0, 0.0],
                                      quadratic={(0, 1): 4.0}))
        assert p.J == {(0, 1): 1.0}
        assert p.h.tolist() == [1.0, 1.0]
        assert p.offset == 1.0

    @pytest.mark.parametrize("seed", range(5))
    def test_exhaustive_energy_identity(self, seed):
        from quboclust import QuboProblem
        rng = np.random.default_rng(seed)
        n = 10
        p = QuboProblem(
            n_vars=n, linear=rng.normal(size=n),
            quadratic={(i, j): float(rng.normal()) for i in range(n)
                       for j in range(i + 1, n) if rng.random() < 0.5},
            offset=float(rng.normal()))
        ising = qubo_to_ising(p)
        eq = enumerate_energies(p)
        ei = enumerate_energies(ising)  # bit 1 -> spin +1, same index order
        assert np.max(np.abs(eq - ei)) <= 1e-9

    @pytest.mark.parametrize("seed", range(3))
    def test_roundtrip_exact(self, seed):
        from quboclust import QuboProblem
        rng = np.random.default_rng(seed)
        n = 7
        p = QuboProblem(
            n_vars=n, linear=rng.normal(size=n),
            quadratic={(i, j): float(rng.normal()) for i in range(n)
                       for j in range(i + 1, n) if rng.random() < 0.7},
            offset=float(rng.normal()))
        back = ising_to_qubo(qubo_to_ising(p))
        assert np.allclose(back.linear, p.linear, atol=1e-12)
        assert back.offset == pytest.approx(p.offset, abs=1e-12)
        for key, val in p.quadratic.items():
            assert back.quadratic[key] == pytest.approx(val, abs=1e-12)


class TestPrecisionCheck:
    def test_paper_case_62(self):
        d = DistanceMatrix(n=4, d=np.zeros((4, 4)))
        report = precision_check(d, 3, 6)
        assert report.d_bound == 62.0
        assert report.feasible

    def test_n10_k4(self):
        d = DistanceMatrix(n=10, d=np.zeros((10, 10)))
        report = precision_check(d, 4, 6)
        assert report.d_bound == pytest.approx(62.0 / 12.0)

    def test_k2_exempt(self):
        rng = np.random.default_rng(0)
        pts = rng.normal(size=(6, 2)) * 100
        d = distance_matrix(Dataset(points=pts))
        report = precision_check(d, 2, 6)
        assert report.d_bound is None
        assert report.feasible

    def test_infeasible_when_d_large(self):
        d = DistanceMatrix(n=4, d=np.where(~np.eye(4, dtype=bool), 100.0, 0.0))
        report = precision_check(d, 3, 6)
        assert not report.feasible
        assert report.max_observed_d == 100.0

    def test_many_bits_always_feasible(self):
        d = DistanceMatrix(n=12, d=np.where(~np.eye(12, dtype=bool), 1e6, 0.0))
        assert precision_check(d, 5, 60).feasible


class TestDecodeOneHot:
    def test_valid_state(self):
        result = decode_onehot([1, 0, 0, 1], 2, 2)
        assert isinstance(result, ClusterAssignment)
        assert result.labels.tolist() == [0, 1]

    def test_multiple_clusters_violation(self):
        result = decode_onehot([1, 1, 0, 1], 2, 2)
        assert isinstance(result, list)
        assert len(result) == 1
        v = result[0]
        assert v.point_index == 0 and v.kind == "multiple_clusters"
        assert v.clusters_set == (0, 1)

    def test_no_cluster_violation(self):
        result = decode_onehot([0, 0, 1, 0], 2, 2)
        assert isinstance(result, list)
        assert len(result) == 1
        v = result[0]
        assert v.point_index == 0 and v.kind == "no_cluster" and v.clusters_set == ()

    def test_repair_assigns_cheapest_cluster(self):
        # three points: 0 and 1 close together, 2 far away
        ds = Dataset(points=[[0.0, 0.0], [0.1, 0.0], [10.0, 0.0]])
        d = distance_matrix(ds, normalize=True)
        # point 1 unassigned; points 0, 2 in clusters 0, 1
        state = [1, 0, 0, 0, 0, 1]
        repaired = decode_onehot(state, 3, 2, policy="repair", d=d)
        assert isinstance(repaired, ClusterAssignment)
        assert repaired.labels.tolist() == [0, 0, 1]
        assert repaired.source_tag == "decode_onehot_repaired"

    def test_repair_multiple_keeps_cheapest_of_set(self):
        ds = Dataset(points=[[0.0, 0.0], [0.1, 0.0], [10.0, 0.0]])
        d = distance_matrix(ds, normalize=True)
        # point 1 claims both clusters; cluster 0 holds its close neighbor
        state = [1, 0, 1, 1, 0, 1]
        repaired = decode_onehot(state, 3, 2, policy="repair", d=d)
        assert repaired.labels.tolist() == [0, 0, 1]

    def test_repair_needs_distances(self):
        with pytest.raises(ConfigurationError):
            decode_onehot([0, 0, 1, 0], 2, 2, policy="repair")

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            decode_onehot([1, 0, 0], 2, 2)

    def test_valid_repair_is_untagged(self):
        result = decode_onehot([1, 0, 0, 1], 2, 2, policy="repair")
        assert result.source_tag == "decode_onehot"


class TestDecodeBinary:
    def test_examples(self):
        assert decode_binary([1, 1, -1]).labels.tolist() == [0, 0, 1]
        assert decode_binary([-1, -1, 1]).labels.tolist() == [1, 1, 0]

    def test_all_same_spin_keeps_empty_cluster(self):
        a = decode_binary([1, 1, 1])
        assert a.labels.tolist() == [0, 0, 0]
        assert a.k == 2 and a.has_empty_clusters

    def test_non_spin_rejected(self):
        with pytest.raises(DomainError):
            decode_binary([1, 0, -1])


class TestPenaltySufficiency:
    """Ground states of the one-hot builder never violate the constraint when
    the penalty meets the worst-case bound; milder multi-assignment states
    never beat the ground state either."""

    @pytest.mark.parametrize("n,k,seed", [(4, 2, 10), (5, 2, 11), (6, 2, 12),
                                          (4, 3, 13), (5, 3, 14), (6, 3, 15)])
    def test_bound_prevents_violations(self, n, k, seed):
        d = _random_distance_matrix(n, seed)
        lam = resolve_lambda(d, k, "paper_bound")
        q = build_onehot_qubo(d, OneHotConfig(k=k, lambda_mode="paper_bound",
                                              lambda_value=lam))
        energies = enumerate_energies(q)
        ground = int(np.argmin(energies))
        state = _states_from_indices(np.array([ground], dtype=np.int64), q.n_vars, False)[0]
        decoded = decode_onehot(state, n, k, policy="strict")
        assert isinstance(decoded, ClusterAssignment)

    @pytest.mark.parametrize("n,k,seed", [(4, 2, 20), (5, 3, 21)])
    def test_multiple_assignment_never_beats_ground(self, n, k, seed):
        d = _random_distance_matrix(n, seed)
        lam = resolve_lambda(d, k, "paper_bound")
        q = build_onehot_qubo(d, OneHotConfig(k=k, lambda_mode="paper_bound",
                                              lambda_value=lam))
        energies = enumerate_energies(q)
        ground = energies.min()
        states = _states_from_indices(np.arange(energies.size, dtype=np.int64),
                                      q.n_vars, False)
        counts = states.reshape(energies.size, n, k).sum(axis=2)
        multi = (counts >= 2).any(axis=1)
        assert np.all(energies[multi] >= ground - 1e-12)
