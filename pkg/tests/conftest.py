"""Shared fixtures: synthetic corpora, images and stub registries.

All fixture data is generated, never sampled from real moderation
content.
"""

from __future__ import annotations

import io
import json

import numpy as np
import pytest
from PIL import Image

from misodetect.corpus import MemeSample, TextSample, make_manifest
from misodetect.taxonomy import MEME_SUBLABELS, TEXT_SUBLABELS

POSITIVE_MARKERS = ["badzaat", "ghatiya", "besharam", "nikamma"]
NEGATIVE_MARKERS = ["shandaar", "umda", "behtareen", "pyara"]


def make_png(rng: np.random.Generator, size: int = 64) -> bytes:
    pixels = rng.integers(0, 256, (size, size, 3), dtype=np.uint8)
    buf = io.BytesIO()
    Image.fromarray(pixels).save(buf, format="PNG")
    return buf.getvalue()


def solid_png(color=(200, 200, 200), size: int = 64) -> bytes:
    buf = io.BytesIO()
    Image.new("RGB", (size, size), color).save(buf, format="PNG")
    return buf.getvalue()


def separable_text_samples(n: int = 32) -> list[TextSample]:
    """Half misogynistic, half non-offensive. Marker words fully determine
    the binary label so a small model can overfit perfectly."""
    samples = []
    for i in range(n // 2):
        marker = POSITIVE_MARKERS[i % len(POSITIVE_MARKERS)]
        sublabels = frozenset(
            {TEXT_SUBLABELS[i % len(TEXT_SUBLABELS)], TEXT_SUBLABELS[(i + 3) % len(TEXT_SUBLABELS)]}
        )
        samples.append(
            TextSample(
                id=f"pos{i}",
                text=f"yeh {marker} comment hai number{i} bilkul {marker}",
                binary_label="misogynistic",
                sublabels=sublabels,
            )
        )
    for i in range(n - n // 2):
        marker = NEGATIVE_MARKERS[i % len(NEGATIVE_MARKERS)]
        samples.append(
            TextSample(
                id=f"neg{i}",
                text=f"yeh {marker} comment hai number{i} bilkul {marker}",
                binary_label="non_offensive",
            )
        )
    return samples


@pytest.fixture
def text_fixture_manifest():
    return make_manifest("text", separable_text_samples(32), source="synthetic-32")


@pytest.fixture
def meme_fixture(tmp_path):
    """16 memes whose OCR text fully determines the label; images are
    seeded noise. Returns (manifest_path, image_root, manifest)."""
    rng = np.random.default_rng(1234)
    image_root = tmp_path / "imgs"
    image_root.mkdir()
    samples = []
    for i in range(16):
        name = f"m{i:02d}.png"
        (image_root / name).write_bytes(make_png(rng))
        positive = i % 2 == 0
        marker = POSITIVE_MARKERS[i % 4] if positive else NEGATIVE_MARKERS[i % 4]
        samples.append(
            MemeSample(
                id=f"meme{i}",
                image_ref=name,
                ocr_text=f"caption {marker} text{i} {marker}",
                binary_label="misogynistic" if positive else "normal",
                sublabels=frozenset({MEME_SUBLABELS[i % 3]}) if positive else frozenset(),
            )
        )
    manifest = make_manifest("meme", samples, source="synthetic-16", image_root=image_root)
    manifest_path = tmp_path / "memes.jsonl"
    from misodetect.corpus import save_manifest

    save_manifest(manifest, manifest_path)
    return manifest_path, image_root, manifest


@pytest.fixture
def stub_registry(tmp_path):
    from misodetect.api import load_server_config
    from misodetect.api.stub import make_stub_registry

    config_path = make_stub_registry(tmp_path / "stub")
    return load_server_config(config_path)


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1].removeprefix("test_")
        verdict = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {verdict}: {name}", flush=True)
