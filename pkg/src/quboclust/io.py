"""File formats: points CSV, QUBO text files, and result JSON.

Floats are written with ``repr`` so every file round-trips bit-exactly;
loading a saved problem and solving it matches the in-memory solve.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DomainError
from .model import Dataset, QuboProblem

LABEL_COLUMN = "label"


def save_points_csv(path: str | Path, data: Dataset) -> None:
    """Write one row per point; a trailing integer label column is announced
    by the header name ``label``."""
    header = [f"x{i}" for i in range(data.dims)]
    if data.true_labels is not None:
        header.append(LABEL_COLUMN)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(data.n):
            row = [repr(float(v)) for v in data.points[i]]
            if data.true_labels is not None:
                row.append(str(int(data.true_labels[i])))
            writer.writerow(row)


def load_points_csv(path: str | Path) -> Dataset:
    """Read a points CSV written by :func:`save_points_csv` (or compatible)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DomainError(f"{path}: empty points file") from None
        has_labels = bool(header) and header[-1].strip().lower() == LABEL_COLUMN
        n_coords = len(header) - (1 if has_labels else 0)
        if n_coords < 1:
            raise DomainError(f"{path}: header declares no coordinate columns")
        points, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DomainError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            points.append([float(v) for v in row[:n_coords]])
            if has_labels:
                labels.append(int(row[-1]))
    if not points:
        raise DomainError(f"{path}: no data rows")
    return Dataset(points=np.array(points, dtype=np.float64),
                   true_labels=np.array(labels, dtype=np.int64) if has_labels else None)


def save_qubo(path: str | Path, problem: QuboProblem) -> None:
    """QUBO text format: header ``qubo <n_vars>``, lines ``i i value`` for
    linear terms, ``i j value`` (i<j) for couplings, then ``offset value``."""
    lines = [f"qubo {problem.n_vars}"]
    for i, v in enumerate(problem.linear):
        if v != 0.0:
            lines.append(f"{i} {i} {float(v)!r}")
    for (i, j) in sorted(problem.quadratic):
        v = problem.quadratic[(i, j)]
        if v != 0.0:
            lines.append(f"{i} {j} {float(v)!r}")
    lines.append(f"offset {float(problem.offset)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_qubo(path: str | Path) -> QuboProblem:
    """Parse the QUBO text format; '#' starts a comment, blank lines ignored."""
    n_vars = None
    linear = None
    quadratic: dict[tuple[int, int], float] = {}
    offset = 0.0
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n_vars is None:
            if len(parts) != 2 or parts[0] != "qubo":
                raise DomainError(f"{path}:{lineno}: expected header 'qubo <n_vars>'")
            n_vars = int(parts[1])
            if n_vars < 1:
                raise DomainError(f"{path}:{lineno}: n_vars must be >= 1")
            linear = np.zeros(n_vars, dtype=np.float64)
            continue
        if parts[0] == "offset":
            if len(parts) != 2:
                raise DomainError(f"{path}:{lineno}: expected 'offset value'")
            offset = float(parts[1])
            continue
        if len(parts) != 3:
            raise DomainError(f"{path}:{lineno}: expected 'i j value'")
        i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        if i == j:
            linear[i] = v
        elif i < j:
            if (i, j) in quadratic:
                raise DomainError(f"{path}:{lineno}: duplicate coupling ({i},{j})")
            quadratic[(i, j)] = v
        else:
            raise DomainError(f"{path}:{lineno}: couplings require i < j")
    if n_vars is None:
        raise DomainError(f"{path}: missing 'qubo <n_vars>' header")
    return QuboProblem(n_vars=n_vars, linear=linear, quadratic=quadratic, offset=offset)


def dump_json(path: str | Path, payload: dict) -> None:
    """Deterministic JSON: sorted keys, fixed separators, trailing newline."""
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"
    )
