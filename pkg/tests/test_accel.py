"""Both accelerator backends must implement the identical contract."""

import math
from itertools import combinations

import numpy as np
import pytest

from misodetect._accel import BACKEND, _fallback

try:
    from misodetect._accel import _speedups
except ImportError:
    _speedups = None

BACKENDS = [_fallback] + ([_speedups] if _speedups is not None else [])


def brute_force_shapley(values: np.ndarray, n: int) -> np.ndarray:
    """Independent oracle: direct sum over subsets using itertools."""
    phi = np.zeros(n)
    players = range(n)
    for i in players:
        others = [p for p in players if p != i]
        for size in range(n):
            for coalition in combinations(others, size):
                mask = sum(1 << p for p in coalition)
                weight = (
                    math.factorial(size) * math.factorial(n - 1 - size) / math.factorial(n)
                )
                phi[i] += weight * (values[mask | (1 << i)] - values[mask])
    return phi


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.split(".")[-1])
def test_shapley_combine_matches_brute_force(impl):
    rng = np.random.default_rng(42)
    for n in (1, 2, 3, 5, 7):
        values = rng.normal(size=1 << n)
        got = impl.shapley_combine(values, n)
        expected = brute_force_shapley(values, n)
        np.testing.assert_allclose(got, expected, atol=1e-10)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.split(".")[-1])
def test_signed_rank_counts_enumeration(impl):
    rng = np.random.default_rng(7)
    for _ in range(10):
        m = rng.integers(1, 9)
        doubled = rng.integers(1, 12, size=m) * 2
        counts = impl.signed_rank_counts(doubled)
        # Oracle: enumerate every sign assignment.
        expected = np.zeros(int(doubled.sum()) + 1, dtype=np.int64)
        for code in range(1 << m):
            w = sum(int(doubled[i]) for i in range(m) if code >> i & 1)
            expected[w] += 1
        np.testing.assert_array_equal(counts, expected)


def test_backends_agree():
    if _speedups is None:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(3)
    values = rng.normal(size=1 << 9)
    np.testing.assert_allclose(
        _fallback.shapley_combine(values, 9), _speedups.shapley_combine(values, 9), atol=1e-12
    )
    ranks = rng.integers(1, 40, size=15)
    np.testing.assert_array_equal(
        _fallback.signed_rank_counts(ranks), _speedups.signed_rank_counts(ranks)
    )


def test_backend_selected():
    assert BACKEND in ("cython", "python")


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.split(".")[-1])
def test_input_validation(impl):
    with pytest.raises(ValueError):
        impl.shapley_combine(np.zeros(5), 2)  # wrong table size
    with pytest.raises(ValueError):
        impl.signed_rank_counts(np.array([0, 2]))
    with pytest.raises(ValueError):
        impl.signed_rank_counts(np.array([], dtype=np.int64))
