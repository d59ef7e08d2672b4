"""Dataset model, ingestion and validation for both moderation corpora.

Datasets are line-delimited JSON, one record per line. Text records:

    {"id": "...", "text": "...", "binary_label": "misogynistic",
     "sublabels": ["derogatory_language", ...]}

Meme records:

    {"id": "...", "image_ref": "imgs/0001.png", "ocr_text": "...",
     "corrected_text": null, "binary_label": "normal", "sublabels": []}

Records that violate the sample invariants are rejected individually and
reported with their line number; a bad record never aborts the load.
Manifests are immutable after load and safe to share across threads.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

from PIL import Image, UnidentifiedImageError

from .taxonomy import (
    MEME_NEGATIVE,
    MEME_SUBLABELS,
    TEXT_NEGATIVE,
    TEXT_SUBLABELS,
    binary_labels_for,
    sublabels_for,
)

DEVANAGARI_RANGE = (0x0900, 0x097F)


class CorpusError(ValueError):
    """A record or manifest violates the dataset contract."""


@dataclass(frozen=True)
class TextSample:
    id: str
    text: str
    binary_label: str
    sublabels: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.text.strip():
            raise CorpusError(f"sample {self.id!r}: text is empty after trimming")
        if self.binary_label not in binary_labels_for("text"):
            raise CorpusError(f"sample {self.id!r}: unknown binary label {self.binary_label!r}")
        unknown = self.sublabels - set(TEXT_SUBLABELS)
        if unknown:
            raise CorpusError(f"sample {self.id!r}: unknown sublabel {sorted(unknown)[0]!r}")
        if self.binary_label == TEXT_NEGATIVE and self.sublabels:
            raise CorpusError(f"sample {self.id!r}: non-offensive sample carries sublabels")
        if self.binary_label != TEXT_NEGATIVE and not self.sublabels:
            raise CorpusError(f"sample {self.id!r}: misogynistic sample without sublabels")

    @property
    def effective_text(self) -> str:
        return self.text


@dataclass(frozen=True)
class MemeSample:
    id: str
    image_ref: str
    ocr_text: str
    binary_label: str
    sublabels: frozenset[str] = frozenset()
    corrected_text: str | None = None

    def __post_init__(self):
        if self.binary_label not in binary_labels_for("meme"):
            raise CorpusError(f"sample {self.id!r}: unknown binary label {self.binary_label!r}")
        unknown = self.sublabels - set(MEME_SUBLABELS)
        if unknown:
            raise CorpusError(f"sample {self.id!r}: unknown sublabel {sorted(unknown)[0]!r}")
        if self.binary_label == MEME_NEGATIVE and self.sublabels:
            raise CorpusError(f"sample {self.id!r}: normal meme carries sublabels")

    @property
    def effective_text(self) -> str:
        """Corrected text when a manual OCR fix exists, raw OCR otherwise."""
        return self.corrected_text if self.corrected_text is not None else self.ocr_text


@dataclass(frozen=True)
class DatasetManifest:
    """Immutable snapshot of a loaded dataset.

    ``source`` and ``image_root`` are provenance, excluded from equality so
    a save/load round trip compares deep-equal on content.
    """

    modality: str
    samples: tuple[TextSample | MemeSample, ...]
    class_counts: Mapping[str, int]
    sublabel_counts: Mapping[str, int]
    source: str = field(default="", compare=False)
    image_root: str | None = field(default=None, compare=False)

    def __post_init__(self):
        expect_binary = tally_binary(self.modality, self.samples)
        expect_sub = tally_sublabels(self.modality, self.samples)
        if dict(self.class_counts) != expect_binary or dict(self.sublabel_counts) != expect_sub:
            raise CorpusError("stored class counts disagree with a fresh tally over samples")

    def __len__(self) -> int:
        return len(self.samples)


class RecordError(NamedTuple):
    line: int
    sample_id: str | None
    message: str


class LoadResult(NamedTuple):
    manifest: DatasetManifest
    errors: tuple[RecordError, ...]


class OverlayResult(NamedTuple):
    manifest: DatasetManifest
    warnings: tuple[str, ...]


def tally_binary(modality: str, samples: Iterable) -> dict[str, int]:
    counts = {label: 0 for label in binary_labels_for(modality)}
    for s in samples:
        counts[s.binary_label] += 1
    return counts


def tally_sublabels(modality: str, samples: Iterable) -> dict[str, int]:
    counts = {label: 0 for label in sublabels_for(modality)}
    for s in samples:
        for sub in s.sublabels:
            counts[sub] += 1
    return counts


def make_manifest(modality, samples, source="", image_root=None) -> DatasetManifest:
    samples = tuple(samples)
    return DatasetManifest(
        modality=modality,
        samples=samples,
        class_counts=tally_binary(modality, samples),
        sublabel_counts=tally_sublabels(modality, samples),
        source=source,
        image_root=str(image_root) if image_root is not None else None,
    )


def _mapped(record: dict, schema: Mapping[str, str] | None, key: str, default=None):
    actual = schema.get(key, key) if schema else key
    return record.get(actual, default)


def _iter_records(path: Path):
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            yield line_no, line


def load_text_dataset(path, schema: Mapping[str, str] | None = None) -> LoadResult:
    """Load a line-delimited JSON text dataset.

    ``schema`` optionally remaps record keys (e.g. ``{"text": "body"}``)
    so foreign manifests load without rewriting. Invalid records are
    collected into the error report with their 1-based line number.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    samples: list[TextSample] = []
    errors: list[RecordError] = []
    seen_ids: set[str] = set()
    for line_no, line in _iter_records(path):
        try:
            record = json.loads(line)
            sample = TextSample(
                id=str(_mapped(record, schema, "id")),
                text=str(_mapped(record, schema, "text", "")),
                binary_label=str(_mapped(record, schema, "binary_label")),
                sublabels=frozenset(_mapped(record, schema, "sublabels", []) or []),
            )
            if sample.id in seen_ids:
                raise CorpusError(f"duplicate sample id {sample.id!r}")
            seen_ids.add(sample.id)
            samples.append(sample)
        except (json.JSONDecodeError, CorpusError, TypeError) as exc:
            errors.append(RecordError(line_no, _safe_id(line), str(exc)))
    manifest = make_manifest("text", samples, source=str(path))
    return LoadResult(manifest, tuple(errors))


def load_meme_dataset(path, image_root, schema: Mapping[str, str] | None = None) -> LoadResult:
    """Load a line-delimited JSON meme dataset.

    Every record's ``image_ref`` must resolve under ``image_root`` to a
    decodable raster image; unresolvable or undecodable references are
    per-record errors.
    """
    path = Path(path)
    image_root = Path(image_root)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    samples: list[MemeSample] = []
    errors: list[RecordError] = []
    seen_ids: set[str] = set()
    for line_no, line in _iter_records(path):
        try:
            record = json.loads(line)
            corrected = _mapped(record, schema, "corrected_text")
            sample = MemeSample(
                id=str(_mapped(record, schema, "id")),
                image_ref=str(_mapped(record, schema, "image_ref")),
                ocr_text=str(_mapped(record, schema, "ocr_text", "")),
                binary_label=str(_mapped(record, schema, "binary_label")),
                sublabels=frozenset(_mapped(record, schema, "sublabels", []) or []),
                corrected_text=None if corrected is None else str(corrected),
            )
            if sample.id in seen_ids:
                raise CorpusError(f"duplicate sample id {sample.id!r}")
            _check_image(image_root / sample.image_ref)
            seen_ids.add(sample.id)
            samples.append(sample)
        except (json.JSONDecodeError, CorpusError, TypeError) as exc:
            errors.append(RecordError(line_no, _safe_id(line), str(exc)))
    manifest = make_manifest("meme", samples, source=str(path), image_root=image_root)
    return LoadResult(manifest, tuple(errors))


def _check_image(full_path: Path):
    if not full_path.exists():
        raise CorpusError(f"image file not found: {full_path}")
    try:
        with Image.open(full_path) as img:
            img.verify()
    except (UnidentifiedImageError, OSError) as exc:
        raise CorpusError(f"undecodable image {full_path}: {exc}") from exc


def _safe_id(line: str) -> str | None:
    try:
        value = json.loads(line)
        return str(value.get("id")) if isinstance(value, dict) else None
    except json.JSONDecodeError:
        return None


def save_manifest(manifest: DatasetManifest, path) -> None:
    """Serialize a manifest back to line-delimited JSON records."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for sample in manifest.samples:
            fh.write(json.dumps(sample_to_record(sample, manifest.modality), ensure_ascii=False))
            fh.write("\n")


def sample_to_record(sample, modality: str) -> dict:
    order = sublabels_for(modality)
    sublabels = sorted(sample.sublabels, key=order.index)
    if modality == "text":
        return {
            "id": sample.id,
            "text": sample.text,
            "binary_label": sample.binary_label,
            "sublabels": sublabels,
        }
    return {
        "id": sample.id,
        "image_ref": sample.image_ref,
        "ocr_text": sample.ocr_text,
        "corrected_text": sample.corrected_text,
        "binary_label": sample.binary_label,
        "sublabels": sublabels,
    }


def contains_devanagari(text: str) -> bool:
    lo, hi = DEVANAGARI_RANGE
    return any(lo <= ord(ch) <= hi for ch in text)


def filter_devanagari(manifest: DatasetManifest) -> tuple[DatasetManifest, DatasetManifest]:
    """Partition a manifest by Devanagari content of the effective text.

    A sample is removed iff its effective text contains at least one code
    point in U+0900..U+097F. Pure: kept and removed together are exactly
    the input, in original order.
    """
    kept, removed = [], []
    for sample in manifest.samples:
        (removed if contains_devanagari(sample.effective_text) else kept).append(sample)
    mk = lambda part: make_manifest(manifest.modality, part, manifest.source, manifest.image_root)
    return mk(kept), mk(removed)


def split_manifest(
    manifest: DatasetManifest,
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> tuple[DatasetManifest, DatasetManifest, DatasetManifest]:
    """Deterministic train/val/test split, stratified by binary label.

    The 80/10/10 default is a repo convention, not a property of the
    corpora; change it per experiment and record the seed.
    """
    import random

    if abs(sum(ratios) - 1.0) > 1e-9 or any(r < 0 for r in ratios):
        raise CorpusError(f"ratios must be non-negative and sum to 1, got {ratios}")
    rng = random.Random(seed)
    buckets: dict[str, list] = {}
    for sample in manifest.samples:
        buckets.setdefault(sample.binary_label, []).append(sample)
    parts: tuple[list, list, list] = ([], [], [])
    for label in sorted(buckets):
        group = list(buckets[label])
        rng.shuffle(group)
        n = len(group)
        n_train = round(ratios[0] * n)
        n_val = round(ratios[1] * n)
        parts[0].extend(group[:n_train])
        parts[1].extend(group[n_train : n_train + n_val])
        parts[2].extend(group[n_train + n_val :])
    order = {s.id: i for i, s in enumerate(manifest.samples)}
    mk = lambda part: make_manifest(
        manifest.modality,
        sorted(part, key=lambda s: order[s.id]),
        manifest.source,
        manifest.image_root,
    )
    return mk(parts[0]), mk(parts[1]), mk(parts[2])


def read_correction_overlay(path) -> dict[str, str]:
    """Read a two-column (id, corrected_text) UTF-8 CSV overlay."""
    overlay: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            if len(row) != 2:
                raise CorpusError(f"overlay row must have exactly 2 columns, got {len(row)}: {row!r}")
            overlay[row[0]] = row[1]
    return overlay


def write_correction_overlay(overlay: Mapping[str, str], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for sample_id, text in overlay.items():
            writer.writerow([sample_id, text])


def apply_ocr_corrections(manifest: DatasetManifest, overlay: Mapping[str, str]) -> OverlayResult:
    """Apply manually verified OCR text to a meme manifest.

    Overlay hits get ``corrected_text`` set; raw ``ocr_text`` is always
    preserved. Overlay ids absent from the manifest become warnings, never
    failures. Idempotent for a fixed overlay.
    """
    if manifest.modality != "meme":
        raise CorpusError("OCR corrections apply to meme manifests only")
    by_id = {s.id for s in manifest.samples}
    warnings = tuple(
        f"overlay id {sid!r} not present in manifest" for sid in overlay if sid not in by_id
    )
    samples = [
        replace(s, corrected_text=overlay[s.id]) if s.id in overlay else s
        for s in manifest.samples
    ]
    return OverlayResult(
        make_manifest("meme", samples, manifest.source, manifest.image_root), warnings
    )
