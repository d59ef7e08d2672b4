"""Numpy reference implementations of the accelerator kernels.

Must stay behaviorally identical to ``_speedups.pyx``; the benchmark and
the backend-equivalence test compare the two directly.
"""

from __future__ import annotations

import math

import numpy as np


def shapley_combine(values: np.ndarray, n_players: int) -> np.ndarray:
    """Combine a full coalition-value table into Shapley values.

    ``values[mask]`` is the game value of the coalition whose members are
    the set bits of ``mask``; the table has 2**n_players entries.
    """
    values = np.asarray(values, dtype=np.float64)
    size = 1 << n_players
    if values.shape != (size,):
        raise ValueError(f"value table must have {size} entries, got {values.shape}")
    masks = np.arange(size, dtype=np.int64)
    popcount = np.zeros(size, dtype=np.int64)
    for bit in range(n_players):
        popcount += (masks >> bit) & 1
    fact = [math.factorial(k) for k in range(n_players + 1)]
    weight = np.array(
        [fact[s] * fact[n_players - 1 - s] / fact[n_players] for s in range(n_players)]
    )
    phi = np.empty(n_players, dtype=np.float64)
    for i in range(n_players):
        bit = 1 << i
        without = masks[(masks & bit) == 0]
        sizes = popcount[without]
        phi[i] = float(np.sum(weight[sizes] * (values[without | bit] - values[without])))
    return phi


def signed_rank_counts(doubled_ranks: np.ndarray) -> np.ndarray:
    """Exact distribution of the doubled signed-rank statistic.

    ``doubled_ranks`` are the absolute-difference ranks times two (so
    mid-ranks from ties become integers). Returns ``counts`` where
    ``counts[w]`` is the number of the 2**m sign assignments whose
    positive-rank sum, doubled, equals ``w``.
    """
    ranks = np.asarray(doubled_ranks, dtype=np.int64)
    if ranks.ndim != 1 or ranks.size == 0:
        raise ValueError("need a non-empty 1-d rank vector")
    if np.any(ranks <= 0):
        raise ValueError("doubled ranks must be positive integers")
    total = int(ranks.sum())
    counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for r in ranks:
        r = int(r)
        counts[r:] = counts[r:] + counts[: total + 1 - r]
    return counts
