# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled accelerator kernels. Mirrors _fallback.py exactly."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def shapley_combine(values, int n_players):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] table = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t size = 1 << n_players
    if table.shape[0] != size:
        raise ValueError(f"value table must have {size} entries, got {table.shape[0]}")

    cdef cnp.ndarray[cnp.float64_t, ndim=1] weight = np.empty(n_players, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] phi = np.zeros(n_players, dtype=np.float64)
    cdef double acc = 1.0
    cdef Py_ssize_t s, i, mask, m, bit
    cdef int pc

    # weight[s] = s! (n-1-s)! / n!
    fact = [1.0] * (n_players + 1)
    for s in range(1, n_players + 1):
        fact[s] = fact[s - 1] * s
    for s in range(n_players):
        weight[s] = fact[s] * fact[n_players - 1 - s] / fact[n_players]

    cdef double[::1] v = table
    cdef double[::1] w = weight
    cdef double[::1] out = phi
    for mask in range(size):
        m = mask
        pc = 0
        while m:
            m &= m - 1
            pc += 1
        for i in range(n_players):
            bit = 1 << i
            if not (mask & bit):
                out[i] += w[pc] * (v[mask | bit] - v[mask])
    return phi


def signed_rank_counts(doubled_ranks):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ranks = np.ascontiguousarray(doubled_ranks, dtype=np.int64)
    if ranks.ndim != 1 or ranks.shape[0] == 0:
        raise ValueError("need a non-empty 1-d rank vector")
    cdef Py_ssize_t m = ranks.shape[0]
    cdef Py_ssize_t i, j
    cdef cnp.int64_t r, total = 0
    for i in range(m):
        if ranks[i] <= 0:
            raise ValueError("doubled ranks must be positive integers")
        total += ranks[i]

    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(total + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] c = counts
    c[0] = 1
    for i in range(m):
        r = ranks[i]
        for j in range(total, r - 1, -1):
            c[j] += c[j - r]
    return counts
