"""Rendering of saliency maps as PNG overlays.

Weight-to-color mapping is a diverging palette symmetric around zero:
warm for positive regions, cool for negative, alpha proportional to
|weight| / max|weight|. Zero-weight regions stay untinted.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .image import SaliencyMap, decode_image
from .solvers import XaiError

POSITIVE_COLOR = (214, 40, 40)
NEGATIVE_COLOR = (37, 99, 235)
DEFAULT_MAX_ALPHA = 0.5


def render_saliency_overlay(
    saliency: SaliencyMap,
    image: bytes,
    pos_color: tuple[int, int, int] = POSITIVE_COLOR,
    neg_color: tuple[int, int, int] = NEGATIVE_COLOR,
    max_alpha: float = DEFAULT_MAX_ALPHA,
) -> bytes:
    pixels = decode_image(image).astype(np.float64)
    if pixels.shape[:2] != saliency.segmentation.shape:
        raise XaiError(
            f"segmentation shape {saliency.segmentation.shape} does not match "
            f"image shape {pixels.shape[:2]}"
        )
    n = saliency.n_regions
    weights = np.zeros(n)
    for rid, w in saliency.region_weights.items():
        weights[int(rid)] = w
    peak = float(np.max(np.abs(weights)))

    if peak > 0:
        per_region_alpha = max_alpha * np.abs(weights) / peak
        tint = np.where(
            (weights > 0)[:, None], np.array(pos_color, dtype=np.float64), np.array(neg_color, dtype=np.float64)
        )
        alpha = per_region_alpha[saliency.segmentation][:, :, None]
        colors = tint[saliency.segmentation]
        pixels = (1.0 - alpha) * pixels + alpha * colors

    out = Image.fromarray(np.clip(pixels, 0, 255).astype(np.uint8), mode="RGB")
    buf = io.BytesIO()
    out.save(buf, format="PNG")
    return buf.getvalue()
