"""Exact Shapley values by full coalition enumeration.

This is the ground-truth oracle the sampled explainers are tested
against. The enumeration itself runs through the accelerator kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import _accel
from .solvers import XaiError

MAX_EXACT_PLAYERS = 20


@dataclass(frozen=True)
class CoalitionGame:
    n_players: int
    value_fn: Callable[[frozenset[int]], float]


def exact_shapley(game: CoalitionGame) -> np.ndarray:
    """Shapley value of every player, phi_i = sum over coalitions S not
    containing i of |S|!(n-1-|S|)!/n! * (v(S+{i}) - v(S))."""
    n = game.n_players
    if n < 1:
        raise XaiError("game needs at least one player")
    if n > MAX_EXACT_PLAYERS:
        raise XaiError(
            f"exact enumeration is limited to {MAX_EXACT_PLAYERS} players, got {n}"
        )
    values = np.empty(1 << n, dtype=np.float64)
    for mask in range(1 << n):
        coalition = frozenset(i for i in range(n) if mask >> i & 1)
        values[mask] = float(game.value_fn(coalition))
    return _accel.shapley_combine(values, n)
