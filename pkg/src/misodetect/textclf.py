"""Training, evaluation and inference for the text-only misogyny models.

One shared encoder feeds two heads: a 2-way softmax for the binary
decision and ten independent sigmoid outputs for the fine-grained
sublabels (per-label binary cross-entropy). Checkpoints are directories
holding weights, the resolved config, the taxonomy fingerprint and the
per-epoch training log as line-delimited JSON.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import torch
from torch import nn

from .corpus import DatasetManifest, TextSample
from .encoders import BACKBONES, TEXT_ENCODER_IDS, ScratchTextEncoder, build_text_encoder
from .prediction import EvalReport, Prediction, evaluate_macro_f1, make_prediction
from .taxonomy import TEXT_SUBLABELS, taxonomy_fingerprint

MODEL_FILE = "model.json"
WEIGHTS_FILE = "weights.pt"
TRAIN_LOG_FILE = "train_log.jsonl"


class ConfigError(ValueError):
    """A model configuration violates its preconditions."""


@dataclass(frozen=True)
class TextModelConfig:
    encoder_id: str = "mbert"
    learning_rate: float = 2e-5
    epochs: int = 3
    max_sequence_length: int = 128
    seed: int = 0
    sublabel_threshold: float = 0.5
    backbone: str = "scratch"
    batch_size: int = 16
    hidden_dim: int = 64
    vocab_size: int = 4096

    def __post_init__(self):
        if self.encoder_id not in TEXT_ENCODER_IDS:
            raise ConfigError(f"unknown encoder_id {self.encoder_id!r}")
        if self.backbone not in BACKBONES:
            raise ConfigError(f"unknown backbone {self.backbone!r}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")
        if self.max_sequence_length < 2:
            raise ConfigError("max_sequence_length must be at least 2")
        if not 0.0 <= self.sublabel_threshold <= 1.0:
            raise ConfigError("sublabel_threshold must lie in [0, 1]")


# Conventional fine-tuning search space: learning rate x epochs.
DEFAULT_GRID = tuple(
    TextModelConfig(learning_rate=lr, epochs=ep)
    for lr in (1e-5, 2e-5, 3e-5, 5e-5)
    for ep in (2, 3, 4, 5)
)


class TwoHeadTextModel(nn.Module):
    def __init__(self, encoder, n_sublabels: int, hidden: int):
        super().__init__()
        self.encoder = encoder
        self.binary_head = nn.Sequential(
            nn.Linear(encoder.out_dim, hidden), nn.ReLU(), nn.Linear(hidden, 2)
        )
        self.sublabel_head = nn.Sequential(
            nn.Linear(encoder.out_dim, hidden), nn.ReLU(), nn.Linear(hidden, n_sublabels)
        )

    def forward(self, texts: list[str]):
        pooled, truncated = self.encoder(texts)
        return self.binary_head(pooled), self.sublabel_head(pooled), truncated


@dataclass
class TextCheckpoint:
    """Loaded text model plus everything needed to reproduce its outputs."""

    model: TwoHeadTextModel
    config: TextModelConfig
    history: list[dict] = field(default_factory=list)
    modality: str = "text"

    @property
    def model_id(self) -> str:
        return self.config.encoder_id

    def predict(self, text: str) -> Prediction:
        return predict_text(self, text)

    def save(self, out_dir) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        meta = {
            "kind": "text",
            "model_id": self.model_id,
            "taxonomy": taxonomy_fingerprint("text"),
            "config": asdict(self.config),
            "encoder_build": self.model.encoder.build_args(),
        }
        (out_dir / MODEL_FILE).write_text(json.dumps(meta, indent=2))
        torch.save(self.model.state_dict(), out_dir / WEIGHTS_FILE)
        with open(out_dir / TRAIN_LOG_FILE, "w", encoding="utf-8") as fh:
            for row in self.history:
                fh.write(json.dumps(row) + "\n")
        return out_dir

    @classmethod
    def load(cls, ckpt_dir) -> "TextCheckpoint":
        ckpt_dir = Path(ckpt_dir)
        meta = json.loads((ckpt_dir / MODEL_FILE).read_text())
        if meta["kind"] != "text":
            raise ValueError(f"{ckpt_dir} holds a {meta['kind']!r} checkpoint, not text")
        if meta["taxonomy"] != taxonomy_fingerprint("text"):
            raise ValueError("checkpoint was trained under a different label taxonomy")
        config = TextModelConfig(**meta["config"])
        encoder = ScratchTextEncoder(**meta["encoder_build"])
        model = TwoHeadTextModel(encoder, len(TEXT_SUBLABELS), config.hidden_dim)
        model.load_state_dict(torch.load(ckpt_dir / WEIGHTS_FILE, map_location="cpu"))
        model.eval()
        history = []
        log_path = ckpt_dir / TRAIN_LOG_FILE
        if log_path.exists():
            history = [json.loads(line) for line in log_path.read_text().splitlines() if line]
        return cls(model=model, config=config, history=history)


def _label_tensors(samples: Sequence[TextSample]):
    y_bin = torch.tensor([1 if s.binary_label == "misogynistic" else 0 for s in samples])
    y_sub = torch.tensor(
        [[1.0 if lab in s.sublabels else 0.0 for lab in TEXT_SUBLABELS] for s in samples]
    )
    return y_bin, y_sub


def _check_text_manifest(manifest: DatasetManifest, role: str):
    if manifest.modality != "text":
        raise ValueError(f"{role} manifest has modality {manifest.modality!r}, expected text")
    for sample in manifest.samples:
        if not isinstance(sample, TextSample):
            raise ValueError(f"{role} manifest contains a non-text sample {sample.id!r}")


def train_text_classifier(
    train: DatasetManifest,
    val: DatasetManifest,
    config: TextModelConfig,
    out_dir=None,
) -> tuple[TextCheckpoint, EvalReport]:
    """Fine-tune a two-head text model and report validation macro-F1.

    Deterministic given ``config.seed`` up to torch CPU kernel guarantees
    (see README); the per-epoch log records loss and validation binary
    macro-F1.
    """
    _check_text_manifest(train, "train")
    _check_text_manifest(val, "val")
    if len(train) == 0:
        raise ValueError("training set is empty")

    torch.manual_seed(config.seed)
    encoder = build_text_encoder(
        config.encoder_id,
        config.backbone,
        max_length=config.max_sequence_length,
        vocab_size=config.vocab_size,
        dim=config.hidden_dim,
    )
    model = TwoHeadTextModel(encoder, len(TEXT_SUBLABELS), config.hidden_dim)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    ce = nn.CrossEntropyLoss()
    bce = nn.BCEWithLogitsLoss()

    texts = [s.text for s in train.samples]
    y_bin, y_sub = _label_tensors(train.samples)
    shuffler = torch.Generator().manual_seed(config.seed)
    checkpoint = TextCheckpoint(model=model, config=config)

    for epoch in range(1, config.epochs + 1):
        model.train()
        order = torch.randperm(len(texts), generator=shuffler)
        epoch_loss = 0.0
        for start in range(0, len(texts), config.batch_size):
            batch_idx = order[start : start + config.batch_size]
            batch_texts = [texts[i] for i in batch_idx]
            logits_bin, logits_sub, _ = model(batch_texts)
            loss = ce(logits_bin, y_bin[batch_idx]) + bce(logits_sub, y_sub[batch_idx])
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += loss.item() * len(batch_idx)
        report = evaluate_checkpoint(checkpoint, val) if len(val) else None
        checkpoint.history.append(
            {
                "epoch": epoch,
                "loss": epoch_loss / len(texts),
                "val_binary_macro_f1": report.binary_macro_f1 if report else None,
            }
        )

    model.eval()
    final_report = evaluate_checkpoint(checkpoint, val if len(val) else train)
    if out_dir is not None:
        checkpoint.save(out_dir)
    return checkpoint, final_report


def predict_text(checkpoint: TextCheckpoint, text: str) -> Prediction:
    """Score one comment. Over-length inputs are truncated and flagged in
    the response, never rejected."""
    if not text.strip():
        raise ValueError("text is empty after trimming")
    model = checkpoint.model
    model.eval()
    with torch.no_grad():
        logits_bin, logits_sub, truncated = model([text])
        p_positive = torch.softmax(logits_bin[0], dim=-1)[1].item()
        sub_scores = torch.sigmoid(logits_sub[0])
    scores = {label: sub_scores[i].item() for i, label in enumerate(TEXT_SUBLABELS)}
    return make_prediction(
        "text",
        p_positive,
        scores,
        checkpoint.config.sublabel_threshold,
        checkpoint.model_id,
        truncated=truncated[0],
    )


def predict_batch(checkpoint: TextCheckpoint, texts: Sequence[str], batch_size: int = 32):
    preds = []
    model = checkpoint.model
    model.eval()
    with torch.no_grad():
        for start in range(0, len(texts), batch_size):
            chunk = list(texts[start : start + batch_size])
            logits_bin, logits_sub, truncated = model(chunk)
            p_pos = torch.softmax(logits_bin, dim=-1)[:, 1]
            sub = torch.sigmoid(logits_sub)
            for row in range(len(chunk)):
                scores = {label: sub[row, i].item() for i, label in enumerate(TEXT_SUBLABELS)}
                preds.append(
                    make_prediction(
                        "text",
                        p_pos[row].item(),
                        scores,
                        checkpoint.config.sublabel_threshold,
                        checkpoint.model_id,
                        truncated=truncated[row],
                    )
                )
    return preds


def evaluate_checkpoint(checkpoint: TextCheckpoint, manifest: DatasetManifest) -> EvalReport:
    _check_text_manifest(manifest, "eval")
    if len(manifest) == 0:
        raise ValueError("evaluation set is empty")
    preds = predict_batch(checkpoint, [s.text for s in manifest.samples])
    return evaluate_macro_f1(preds, manifest.samples, modality="text")


@dataclass(frozen=True)
class LeaderboardRow:
    config: TextModelConfig
    binary_macro_f1: float
    multilabel_macro_f1: float


def tune_hyperparameters(
    train: DatasetManifest,
    val: DatasetManifest,
    grid: Sequence[TextModelConfig] = DEFAULT_GRID,
) -> tuple[TextModelConfig, tuple[LeaderboardRow, ...]]:
    """Train every config in the grid and rank by validation binary
    macro-F1, breaking ties by multilabel macro-F1, then lower learning
    rate. The full leaderboard comes back for audit."""
    if not grid:
        raise ValueError("hyperparameter grid is empty")
    rows = []
    for config in grid:
        _, report = train_text_classifier(train, val, config)
        rows.append(LeaderboardRow(config, report.binary_macro_f1, report.multilabel_macro_f1))
    ranked = sorted(
        rows,
        key=lambda r: (-r.binary_macro_f1, -r.multilabel_macro_f1, r.config.learning_rate),
    )
    return ranked[0].config, tuple(ranked)
