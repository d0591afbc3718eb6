"""Numba-compiled inner loops for the stochastic solvers.

Problems arrive as symmetric CSR adjacency (indptr/indices/data) plus the
linear coefficient vector; ``is_spin`` switches the flip rule between binary
(q -> 1-q) and spin (s -> -s) variables. Local fields
f_i = lin_i + sum_j c_ij x_j are maintained incrementally so a flip costs
O(degree). Energies tracked here are used only to steer the search; callers
re-evaluate returned states exactly.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def local_fields(indptr, indices, data, lin, x):
    f = lin.copy()
    n = lin.size
    for i in range(n):
        xi = x[i]
        if xi != 0:
            for p in range(indptr[i], indptr[i + 1]):
                f[indices[p]] += data[p] * xi
    return f


@njit(cache=True)
def state_energy(indptr, indices, data, lin, offset, x):
    e = offset
    n = lin.size
    for i in range(n):
        e += lin[i] * x[i]
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j > i:
                e += data[p] * x[i] * x[j]
    return e


@njit(cache=True)
def sa_chains(indptr, indices, data, lin, offset, is_spin, temps, chain_seeds):
    """Independent Metropolis single-flip chains; one row of output per chain.

    Each chain reseeds from its own entry of ``chain_seeds``, so results do
    not depend on chain execution order. A sweep is n attempted flips at one
    temperature; the best state visited (initial state included) is kept.
    """
    n = lin.size
    n_chains = chain_seeds.size
    n_sweeps = temps.size
    best_states = np.empty((n_chains, n), dtype=np.int8)
    for c in range(n_chains):
        np.random.seed(chain_seeds[c])
        x = np.empty(n, dtype=np.int8)
        for i in range(n):
            r = np.random.randint(0, 2)
            x[i] = 2 * r - 1 if is_spin else r
        f = local_fields(indptr, indices, data, lin, x)
        e = state_energy(indptr, indices, data, lin, offset, x)
        best_e = e
        best_x = x.copy()
        for sweep in range(n_sweeps):
            t = temps[sweep]
            for _ in range(n):
                i = np.random.randint(0, n)
                delta = -2 * x[i] if is_spin else 1 - 2 * x[i]
                de = delta * f[i]
                if de <= 0.0 or np.random.random() < np.exp(-de / t):
                    x[i] += delta
                    for p in range(indptr[i], indptr[i + 1]):
                        f[indices[p]] += data[p] * delta
                    e += de
                    if e < best_e:
                        best_e = e
                        for q in range(n):
                            best_x[q] = x[q]
        best_states[c] = best_x
    return best_states


@njit(cache=True)
def tabu_run(indptr, indices, data, lin, offset, is_spin, tenure,
             max_iterations, stall_limit, x0):
    """Single-flip tabu search: always take the best admissible move (uphill
    when nothing better), forbid re-flipping for ``tenure`` iterations unless
    the move beats the incumbent (aspiration). Ties go to the lowest index.
    """
    n = lin.size
    x = x0.copy()
    f = local_fields(indptr, indices, data, lin, x)
    e = state_energy(indptr, indices, data, lin, offset, x)
    best_e = e
    best_x = x.copy()
    tabu_until = np.full(n, -1, dtype=np.int64)
    stall = 0
    for it in range(max_iterations):
        best_i = -1
        best_de = np.inf
        for i in range(n):
            delta = -2 * x[i] if is_spin else 1 - 2 * x[i]
            de = delta * f[i]
            if it >= tabu_until[i] or e + de < best_e - 1e-12:
                if de < best_de:
                    best_de = de
                    best_i = i
        if best_i < 0:
            break
        delta = -2 * x[best_i] if is_spin else 1 - 2 * x[best_i]
        x[best_i] += delta
        for p in range(indptr[best_i], indptr[best_i + 1]):
            f[indices[p]] += data[p] * delta
        e += best_de
        tabu_until[best_i] = it + tenure
        if e < best_e - 1e-12:
            best_e = e
            for q in range(n):
                best_x[q] = x[q]
            stall = 0
        else:
            stall += 1
            if stall >= stall_limit:
                break
    return best_x
