"""Stub checkpoints: fixed-output models for contract tests and UI work.

A stub checkpoint is a directory with a ``model.json`` of kind
``stub_text`` or ``stub_meme``. Its prediction is a constant base
confidence, optionally shifted by per-word weights on the input text, so
explanation endpoints produce non-degenerate output without any trained
weights. Everything is deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from ..mmclf import _decode
from ..prediction import Prediction, make_prediction
from ..taxonomy import sublabels_for, taxonomy_fingerprint

MODEL_FILE = "model.json"


def _clip(x: float) -> float:
    return min(1.0, max(0.0, x))


@dataclass
class StubModel:
    model_id: str
    modality: str
    base_confidence: float = 0.5
    sublabel_bases: Mapping[str, float] = field(default_factory=dict)
    token_weights: Mapping[str, float] = field(default_factory=dict)
    threshold: float = 0.5

    def _score_text(self, text: str) -> float:
        bump = sum(self.token_weights.get(w.lower(), 0.0) for w in text.split())
        return _clip(self.base_confidence + bump)

    def _prediction(self, text: str) -> Prediction:
        p = self._score_text(text)
        scores = {
            label: _clip(self.sublabel_bases.get(label, 0.0) + (p - self.base_confidence))
            for label in sublabels_for(self.modality)
        }
        return make_prediction(self.modality, p, scores, self.threshold, self.model_id)

    def predict(self, *args) -> Prediction:
        if self.modality == "text":
            (text,) = args
            if not text.strip():
                raise ValueError("text is empty after trimming")
            return self._prediction(text)
        image, text = args
        _decode(image)  # undecodable images must fail like the real model
        return self._prediction(text)

    def save(self, out_dir) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        meta = {
            "kind": f"stub_{self.modality}",
            "model_id": self.model_id,
            "taxonomy": taxonomy_fingerprint(self.modality),
            "params": {
                "base_confidence": self.base_confidence,
                "sublabel_bases": dict(self.sublabel_bases),
                "token_weights": dict(self.token_weights),
                "threshold": self.threshold,
            },
        }
        (out_dir / MODEL_FILE).write_text(json.dumps(meta, indent=2))
        return out_dir

    @classmethod
    def load(cls, ckpt_dir) -> "StubModel":
        meta = json.loads((Path(ckpt_dir) / MODEL_FILE).read_text())
        if not meta["kind"].startswith("stub_"):
            raise ValueError(f"{ckpt_dir} is not a stub checkpoint")
        return cls(
            model_id=meta["model_id"],
            modality=meta["kind"].removeprefix("stub_"),
            **meta["params"],
        )


DEFAULT_STUB_LEXICON = {
    "aunt": 0.22,
    "sagging": 0.18,
    "dahej": 0.15,
    "kitchen": 0.12,
    "respect": -0.2,
    "thanks": -0.15,
}


def make_stub_registry(root, lexicon: Mapping[str, float] | None = None) -> Path:
    """Write four stub checkpoints plus a ready-to-serve config file under
    ``root``; returns the config path. Used by tests, the frontend dev
    loop and `misodetect stub-registry`."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    lexicon = dict(DEFAULT_STUB_LEXICON if lexicon is None else lexicon)
    plan = [
        ("mbert", "text", 0.55),
        ("xlmr", "text", 0.45),
        ("mbert_resnet", "meme", 0.55),
        ("mbert_efficientnet", "meme", 0.45),
    ]
    entries = []
    for model_id, modality, base in plan:
        ckpt = root / f"stub_{model_id}"
        sub_bases = {label: 0.3 + 0.1 * i for i, label in enumerate(sublabels_for(modality))}
        StubModel(
            model_id=model_id,
            modality=modality,
            base_confidence=base,
            sublabel_bases=sub_bases,
            token_weights=lexicon,
        ).save(ckpt)
        entries.append(
            {
                "model_id": model_id,
                "modality": modality,
                "checkpoint": str(ckpt.name),
                "metrics": {},
            }
        )
    config = {
        "registry": entries,
        "port": 8000,
        "job_concurrency": 2,
        "upload_cap_bytes": 10 * 1024 * 1024,
        "artifacts_dir": "artifacts",
        "store_path": "feedback.sqlite",
        "ocr": {"kind": "fixture"},
    }
    config_path = root / "config.json"
    config_path.write_text(json.dumps(config, indent=2))
    return config_path
