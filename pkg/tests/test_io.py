import numpy as np
import pytest

from quboclust import Dataset, DomainError, QuboProblem
from quboclust.io import (dump_json, load_points_csv, load_qubo, save_points_csv,
                          save_qubo)


def test_points_roundtrip_with_labels(tmp_path):
    rng = np.random.default_rng(0)
    ds = Dataset(points=rng.normal(size=(7, 3)), true_labels=rng.integers(0, 3, size=7))
    path = tmp_path / "pts.csv"
    save_points_csv(path, ds)
    back = load_points_csv(path)
    assert np.array_equal(back.points, ds.points)
    assert np.array_equal(back.true_labels, ds.true_labels)


def test_points_roundtrip_without_labels(tmp_path):
    ds = Dataset(points=[[0.1, -2.5], [3.25, 4.0]])
    path = tmp_path / "pts.csv"
    save_points_csv(path, ds)
    back = load_points_csv(path)
    assert np.array_equal(back.points, ds.points)
    assert back.true_labels is None


def test_points_header_announces_label_column(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("x0,x1,label\n1.0,2.0,1\n3.0,4.0,0\n")
    ds = load_points_csv(path)
    assert ds.true_labels is not None
    assert ds.true_labels.tolist() == [1, 0]


def test_points_bad_row_width(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("x0,x1\n1.0\n")
    with pytest.raises(DomainError):
        load_points_csv(path)


def test_points_empty_file(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("")
    with pytest.raises(DomainError):
        load_points_csv(path)


def test_qubo_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(3)
    n = 9
    p = QuboProblem(
        n_vars=n, linear=rng.normal(size=n),
        quadratic={(i, j): float(rng.normal()) for i in range(n)
                   for j in range(i + 1, n) if rng.random() < 0.5},
        offset=float(rng.normal()))
    path = tmp_path / "p.qubo"
    save_qubo(path, p)
    back = load_qubo(path)
    assert back.n_vars == p.n_vars
    assert np.array_equal(back.linear, p.linear)
    assert back.quadratic == p.quadratic
    assert back.offset == p.offset


def test_qubo_comments_and_blank_lines(tmp_path):
    path = tmp_path / "p.qubo"
    path.write_text("# a comment\nqubo 2\n\n0 0 -1.5  # trailing\n0 1 2.0\noffset 3.0\n")
    p = load_qubo(path)
    assert p.n_vars == 2
    assert p.linear.tolist() == [-1.5, 0.0]
    assert p.quadratic == {(0, 1): 2.0}
    assert p.offset == 3.0


def test_qubo_rejects_lower_triangle(tmp_path):
    path = tmp_path / "p.qubo"
    path.write_text("qubo 2\n1 0 2.0\n")
    with pytest.raises(DomainError):
        load_qubo(path)


def test_qubo_rejects_duplicate_coupling(tmp_path):
    path = tmp_path / "p.qubo"
    path.write_text("qubo 2\n0 1 2.0\n0 1 3.0\n")
    with pytest.raises(DomainError):
        load_qubo(path)


def test_qubo_missing_header(tmp_path):
    path = tmp_path / "p.qubo"
    path.write_text("0 0 1.0\n")
    with pytest.raises(DomainError):
        load_qubo(path)


def test_dump_json_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    payload = {"z": 1.5, "a": [1, 2, 3], "m": {"y": None, "x": 0.1}}
    dump_json(a, payload)
    dump_json(b, payload)
    assert a.read_bytes() == b.read_bytes()
