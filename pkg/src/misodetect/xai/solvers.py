"""Perturbation-based surrogate solvers shared by text and image explainers.

Both explanation methods reduce to the same shape: enumerate or sample
binary presence masks over d units (words or image regions), score each
masked variant with the model, and fit a weighted linear surrogate whose
coefficients are the attributions.

For Kernel SHAP, exhaustive mode (all 2**d masks) is auto-selected for
d <= EXHAUSTIVE_LIMIT so desk-scale behavior is exactly testable, and the
solution then equals exact Shapley values; sampling kicks in above that.
LIME is sampled by definition and always draws n_perturbations masks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import comb

EXHAUSTIVE_LIMIT = 12
LIME_KERNEL_WIDTH = 25.0
LIME_DISTANCE_SCALE = 100.0
LIME_RIDGE_ALPHA = 1.0


class XaiError(ValueError):
    """Raised for invalid explanation requests or failing model calls."""


@dataclass(frozen=True)
class SurrogateFit:
    weights: np.ndarray
    base_value: float
    n_evaluations: int
    fidelity_r2: float | None
    exhaustive: bool


def _all_masks(d: int) -> np.ndarray:
    """All 2**d presence masks, ordered by integer bit pattern."""
    codes = np.arange(1 << d, dtype=np.int64)
    return ((codes[:, None] >> np.arange(d)) & 1).astype(np.float64)


def _evaluate(value_of_masks: Callable[[np.ndarray], np.ndarray], masks: np.ndarray) -> np.ndarray:
    out = np.asarray(value_of_masks(masks), dtype=np.float64)
    if out.shape != (masks.shape[0],):
        raise XaiError(f"model scores have shape {out.shape}, expected ({masks.shape[0]},)")
    return out


def _weighted_r2(y: np.ndarray, pred: np.ndarray, w: np.ndarray) -> float | None:
    wsum = w.sum()
    if wsum <= 0:
        return None
    mean = float(np.dot(w, y) / wsum)
    ss_tot = float(np.dot(w, (y - mean) ** 2))
    if ss_tot < 1e-12:
        return None
    ss_res = float(np.dot(w, (y - pred) ** 2))
    return 1.0 - ss_res / ss_tot


def shapley_kernel_weights(d: int, sizes: np.ndarray) -> np.ndarray:
    """Kernel SHAP regression weight for coalitions of the given sizes
    (sizes strictly between 0 and d; the endpoints enter as constraints)."""
    sizes = np.asarray(sizes, dtype=np.int64)
    return (d - 1) / (comb(d, sizes) * sizes * (d - sizes))


def solve_kernel_shap(
    value_of_masks: Callable[[np.ndarray], np.ndarray],
    d: int,
    n_perturbations: int,
    rng: np.random.Generator,
) -> SurrogateFit:
    """Shapley-kernel weighted regression with the efficiency constraint.

    The intercept is pinned to the all-masked score and the coefficient sum
    to f(full) - f(empty), so base_value + sum(weights) always reproduces
    the model score on the intact input. In exhaustive mode the solution
    equals exact Shapley values of the induced masking game.
    """
    endpoint = _evaluate(value_of_masks, np.vstack([np.zeros(d), np.ones(d)]))
    base, full = float(endpoint[0]), float(endpoint[1])
    delta = full - base
    if d == 1:
        return SurrogateFit(np.array([delta]), base, 2, None, True)

    exhaustive = d <= EXHAUSTIVE_LIMIT
    if exhaustive:
        masks = _all_masks(d)[1:-1]  # interior coalitions only
        w = shapley_kernel_weights(d, masks.sum(axis=1).astype(np.int64))
        n_evals = (1 << d)
    else:
        sizes = np.arange(1, d)
        p = (d - 1) / (sizes * (d - sizes))
        p = p / p.sum()
        drawn = rng.choice(sizes, size=n_perturbations, p=p)
        masks = np.zeros((n_perturbations, d))
        for row, s in enumerate(drawn):
            masks[row, rng.choice(d, size=int(s), replace=False)] = 1.0
        w = np.ones(n_perturbations)
        n_evals = n_perturbations + 2

    y = _evaluate(value_of_masks, masks)
    # Eliminate the last coefficient through the sum constraint.
    target = (y - base) - masks[:, -1] * delta
    design = masks[:, :-1] - masks[:, -1:]
    aw = design * w[:, None]
    gram = design.T @ aw
    rhs = aw.T @ target
    head = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    phi = np.append(head, delta - head.sum())
    r2 = _weighted_r2(y, base + masks @ phi, w)
    return SurrogateFit(phi, base, n_evals, r2, exhaustive)


def lime_kernel(masks: np.ndarray, d: int) -> np.ndarray:
    """Exponential kernel on the scaled cosine distance to the full mask."""
    kept = masks.sum(axis=1)
    distance = 1.0 - np.sqrt(kept / d)
    distance[kept == 0] = 1.0
    scaled = LIME_DISTANCE_SCALE * distance
    return np.sqrt(np.exp(-(scaled**2) / LIME_KERNEL_WIDTH**2))


def solve_lime(
    value_of_masks: Callable[[np.ndarray], np.ndarray],
    d: int,
    n_perturbations: int,
    rng: np.random.Generator,
) -> SurrogateFit:
    """Weighted ridge surrogate over word/region presence indicators.

    Always sampled: the first mask is the intact input, the rest disable a
    uniformly drawn number of units at uniformly drawn positions.
    """
    masks = np.ones((n_perturbations, d))
    n_disabled = rng.integers(1, d + 1, size=max(n_perturbations - 1, 0))
    for row, k in enumerate(n_disabled, start=1):
        masks[row, rng.choice(d, size=int(k), replace=False)] = 0.0
    y = _evaluate(value_of_masks, masks)
    w = lime_kernel(masks, d)

    from sklearn.linear_model import Ridge

    surrogate = Ridge(alpha=LIME_RIDGE_ALPHA)
    surrogate.fit(masks, y, sample_weight=w)
    phi = np.asarray(surrogate.coef_, dtype=np.float64)
    base = float(surrogate.intercept_)
    r2 = _weighted_r2(y, surrogate.predict(masks), w)
    return SurrogateFit(phi, base, masks.shape[0], r2, False)


SOLVERS = {"kernel_shap": solve_kernel_shap, "lime": solve_lime}


def solve(method: str, value_of_masks, d: int, n_perturbations: int, seed: int) -> SurrogateFit:
    if method not in SOLVERS:
        raise XaiError(f"unknown explanation method {method!r}; expected one of {sorted(SOLVERS)}")
    if n_perturbations < 1:
        raise XaiError("n_perturbations must be positive")
    return SOLVERS[method](value_of_masks, d, n_perturbations, np.random.default_rng(seed))
