"""Model registry and server configuration.

The registry maps the four serveable model ids onto checkpoint
directories; each checkpoint self-describes its kind in ``model.json``
(``text``, ``meme``, ``stub_text``, ``stub_meme``) and is loaded eagerly
at startup so a bad path fails the boot, not a request.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from ..mmclf import FixtureOcrEngine, HttpOcrEngine, MemeCheckpoint
from ..textclf import TextCheckpoint
from .stub import MODEL_FILE, StubModel

ALLOWED_MODEL_IDS = ("mbert", "xlmr", "mbert_resnet", "mbert_efficientnet")
PORT_ENV = "MISODETECT_PORT"
CONFIG_ENV = "MISODETECT_CONFIG"


class RegistryError(ValueError):
    """The registry config or a checkpoint is inconsistent."""


@dataclass(frozen=True)
class ModelRegistryEntry:
    model_id: str
    modality: str
    checkpoint: str
    metrics: Mapping[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "modality": self.modality,
            "checkpoint": self.checkpoint,
            "metrics": dict(self.metrics),
        }


def _load_checkpoint(ckpt_dir: Path):
    kind = json.loads((ckpt_dir / MODEL_FILE).read_text())["kind"]
    loaders = {
        "text": TextCheckpoint.load,
        "meme": MemeCheckpoint.load,
        "stub_text": StubModel.load,
        "stub_meme": StubModel.load,
    }
    if kind not in loaders:
        raise RegistryError(f"unknown checkpoint kind {kind!r} in {ckpt_dir}")
    return loaders[kind](ckpt_dir)


class ModelRegistry:
    def __init__(self, entries: list[ModelRegistryEntry], base_dir: Path):
        self.entries = list(entries)
        self._models = {}
        seen = set()
        for entry in self.entries:
            if entry.model_id not in ALLOWED_MODEL_IDS:
                raise RegistryError(f"model_id {entry.model_id!r} not in {ALLOWED_MODEL_IDS}")
            if entry.model_id in seen:
                raise RegistryError(f"duplicate model_id {entry.model_id!r}")
            seen.add(entry.model_id)
            model = _load_checkpoint(base_dir / entry.checkpoint)
            if model.modality != entry.modality:
                raise RegistryError(
                    f"model {entry.model_id!r}: registry says {entry.modality!r} but the "
                    f"checkpoint is {model.modality!r}"
                )
            self._models[entry.model_id] = model

    def get(self, model_id: str):
        return self._models.get(model_id)

    def to_dicts(self) -> list[dict]:
        return [entry.to_dict() for entry in self.entries]


@dataclass
class ServerConfig:
    registry: list[ModelRegistryEntry]
    base_dir: Path
    port: int = 8000
    job_concurrency: int = 2
    upload_cap_bytes: int = 10 * 1024 * 1024
    artifacts_dir: str = "artifacts"
    store_path: str = "feedback.sqlite"
    ocr: Mapping = field(default_factory=lambda: {"kind": "fixture"})


def load_server_config(path) -> ServerConfig:
    """Read the single JSON config file. MISODETECT_PORT overrides the
    configured port; MISODETECT_CONFIG (handled by the CLI) overrides the
    path itself. Relative paths resolve against the config file."""
    path = Path(path)
    raw = json.loads(path.read_text())
    entries = [
        ModelRegistryEntry(
            model_id=e["model_id"],
            modality=e["modality"],
            checkpoint=e["checkpoint"],
            metrics=e.get("metrics", {}),
        )
        for e in raw.get("registry", [])
    ]
    config = ServerConfig(
        registry=entries,
        base_dir=path.parent.resolve(),
        port=int(raw.get("port", 8000)),
        job_concurrency=int(raw.get("job_concurrency", 2)),
        upload_cap_bytes=int(raw.get("upload_cap_bytes", 10 * 1024 * 1024)),
        artifacts_dir=raw.get("artifacts_dir", "artifacts"),
        store_path=raw.get("store_path", "feedback.sqlite"),
        ocr=raw.get("ocr", {"kind": "fixture"}),
    )
    if os.environ.get(PORT_ENV):
        config.port = int(os.environ[PORT_ENV])
    return config


def build_ocr_engine(spec: Mapping, base_dir: Path):
    kind = spec.get("kind", "fixture")
    if kind == "fixture":
        table_path = spec.get("table")
        if table_path:
            return FixtureOcrEngine.from_file(base_dir / table_path)
        return FixtureOcrEngine()
    if kind == "http":
        return HttpOcrEngine(spec["url"], timeout=float(spec.get("timeout", 10.0)))
    raise RegistryError(f"unknown OCR engine kind {kind!r}")
