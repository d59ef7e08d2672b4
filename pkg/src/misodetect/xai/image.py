"""Region-level saliency for multimodal models.

The image is partitioned into a regular grid of regions; a perturbation
replaces masked regions with the image mean color while the text input is
held fixed. Region weights come from the same LIME / Kernel SHAP solvers
as word attributions.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from PIL import Image, UnidentifiedImageError

from .solvers import XaiError, solve
from .text import BINARY_TARGET


@dataclass(frozen=True, eq=False)
class SaliencyMap:
    segmentation: np.ndarray  # (H, W) region ids, dense from 0
    region_weights: Mapping[int, float]
    method: str
    target: str
    seed: int = field(default=0)

    @property
    def n_regions(self) -> int:
        return int(self.segmentation.max()) + 1

    def to_dict(self) -> dict:
        return {
            "shape": list(self.segmentation.shape),
            "grid": _grid_dims(self.segmentation),
            "region_weights": {str(k): v for k, v in self.region_weights.items()},
            "method": self.method,
            "target": self.target,
            "seed": self.seed,
        }


def _grid_dims(segmentation: np.ndarray) -> list[int]:
    rows = len(np.unique(segmentation[:, 0]))
    cols = len(np.unique(segmentation[0, :]))
    return [rows, cols]


def decode_image(image_bytes: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(image_bytes)) as img:
            return np.asarray(img.convert("RGB"))
    except (UnidentifiedImageError, OSError) as exc:
        raise XaiError(f"undecodable image: {exc}") from exc


def grid_segmentation(height: int, width: int, n_regions: int) -> np.ndarray:
    """Regular grid with about n_regions cells; ids dense from 0,
    row-major. Every pixel belongs to exactly one region."""
    cols = int(np.ceil(np.sqrt(n_regions)))
    rows = int(np.ceil(n_regions / cols))
    row_edges = np.linspace(0, height, rows + 1).astype(int)
    col_edges = np.linspace(0, width, cols + 1).astype(int)
    seg = np.empty((height, width), dtype=np.int32)
    for r in range(rows):
        for c in range(cols):
            seg[row_edges[r] : row_edges[r + 1], col_edges[c] : col_edges[c + 1]] = r * cols + c
    return seg


def explain_image(
    model_fn: Callable[[np.ndarray, str], float],
    image: bytes,
    text: str,
    method: str = "kernel_shap",
    target: str = BINARY_TARGET,
    n_perturbations: int = 1000,
    seed: int = 0,
    n_regions: int = 8,
) -> SaliencyMap:
    """Attribute ``model_fn``'s score to grid regions of the image.

    ``model_fn`` takes the (possibly perturbed) RGB uint8 array and the
    fixed text, returning one float for the bound target.
    """
    if n_regions < 2:
        raise XaiError("need at least 2 regions")
    pixels = decode_image(image)
    seg = grid_segmentation(pixels.shape[0], pixels.shape[1], n_regions)
    n = int(seg.max()) + 1
    mean_color = pixels.reshape(-1, 3).mean(axis=0)

    def value_of_masks(masks: np.ndarray) -> np.ndarray:
        scores = np.empty(masks.shape[0])
        for row, mask in enumerate(masks):
            perturbed = pixels.copy()
            hidden = np.isin(seg, np.flatnonzero(mask == 0))
            perturbed[hidden] = mean_color.astype(pixels.dtype)
            try:
                scores[row] = float(model_fn(perturbed, text))
            except Exception as exc:
                raise XaiError(
                    f"model_fn failed on mask {mask.astype(int).tolist()}: {exc}"
                ) from exc
        return scores

    fit = solve(method, value_of_masks, n, n_perturbations, seed)
    weights = {rid: float(w) for rid, w in enumerate(fit.weights)}
    return SaliencyMap(segmentation=seg, region_weights=weights, method=method, target=target, seed=seed)
