import io

import numpy as np
import pytest
from PIL import Image

from misodetect.xai import SaliencyMap, XaiError, grid_segmentation, render_saliency_overlay

from .conftest import make_png


def decode(png: bytes) -> np.ndarray:
    return np.asarray(Image.open(io.BytesIO(png)).convert("RGB")).astype(int)


def build_map(weights: dict[int, float], size=64, n_regions=4, method="kernel_shap"):
    return SaliencyMap(
        segmentation=grid_segmentation(size, size, n_regions),
        region_weights=weights,
        method=method,
        target="binary_positive",
        seed=0,
    )


def test_zero_map_leaves_image_untouched():
    data = make_png(np.random.default_rng(0))
    out = render_saliency_overlay(build_map({0: 0.0, 1: 0.0, 2: 0.0, 3: 0.0}), data)
    assert np.array_equal(decode(out), decode(data))


def test_single_positive_region_tinted_warm():
    data = make_png(np.random.default_rng(1))
    before = decode(data)
    out = decode(render_saliency_overlay(build_map({0: 1.0, 1: 0.0, 2: 0.0, 3: 0.0}), data))
    seg = grid_segmentation(64, 64, 4)
    tinted = out[seg == 0] - before[seg == 0]
    untouched = out[seg != 0] - before[seg != 0]
    assert np.array_equal(untouched, np.zeros_like(untouched))
    # warm tint: red channel pushed up relative to blue on average
    assert tinted[:, 0].mean() > 10
    assert tinted[:, 0].mean() > tinted[:, 2].mean()


def test_mixed_signs_warm_cool_split():
    data = make_png(np.random.default_rng(2))
    before = decode(data)
    out = decode(
        render_saliency_overlay(build_map({0: 1.0, 1: -1.0, 2: 0.0, 3: 0.0}), data)
    )
    seg = grid_segmentation(64, 64, 4)
    warm = (out - before)[seg == 0]
    cool = (out - before)[seg == 1]
    assert warm[:, 0].mean() > warm[:, 2].mean()  # red up in positive region
    assert cool[:, 2].mean() > cool[:, 0].mean()  # blue up in negative region


def test_alpha_scales_with_magnitude():
    data = make_png(np.random.default_rng(3))
    before = decode(data)
    out = decode(
        render_saliency_overlay(build_map({0: 1.0, 1: 0.25, 2: 0.0, 3: 0.0}), data)
    )
    seg = grid_segmentation(64, 64, 4)
    strong = np.abs(out - before)[seg == 0].mean()
    weak = np.abs(out - before)[seg == 1].mean()
    assert strong > weak > 0


def test_dimension_mismatch_rejected():
    data = make_png(np.random.default_rng(4), size=32)
    with pytest.raises(XaiError, match="does not match"):
        render_saliency_overlay(build_map({0: 1.0, 1: 0.0, 2: 0.0, 3: 0.0}, size=64), data)


def test_output_is_png():
    data = make_png(np.random.default_rng(5))
    out = render_saliency_overlay(build_map({0: 0.5, 1: 0.0, 2: 0.0, 3: 0.0}), data)
    assert out.startswith(b"\x89PNG")
