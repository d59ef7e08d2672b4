"""Multimodal meme classification: OCR client, late-fusion model, training
and inference.

The text branch and a small convolutional image branch are encoded
independently, their pooled embeddings concatenated and fed to a 2-layer
MLP per head (binary + three sublabels). Training consumes the corrected
OCR text when a manual fix exists; serving uses whatever text the OCR
engine returns, since corrections are offline artifacts.

OCR itself is an external engine behind a one-method client contract:
image bytes in, OcrResult out. Nothing here fabricates text when an
engine fails; transport problems surface as OcrTransportError.
"""

from __future__ import annotations

import hashlib
import io
import json
import urllib.error
import urllib.request
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Protocol

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError
from torch import nn

from .corpus import DatasetManifest, MemeSample
from .encoders import BACKBONES, IMAGE_ENCODER_IDS, ScratchTextEncoder, build_image_encoder, build_text_encoder
from .prediction import EvalReport, Prediction, evaluate_macro_f1, make_prediction
from .taxonomy import MEME_SUBLABELS, taxonomy_fingerprint
from .textclf import MODEL_FILE, TRAIN_LOG_FILE, WEIGHTS_FILE, ConfigError

# Channel normalization recorded in every checkpoint so inference cannot
# drift from training.
DEFAULT_CHANNEL_MEAN = (0.5, 0.5, 0.5)
DEFAULT_CHANNEL_STD = (0.5, 0.5, 0.5)


class OcrError(ValueError):
    """The input image cannot be OCR'd (undecodable bytes)."""


class OcrTransportError(RuntimeError):
    """The OCR engine was unreachable or timed out."""


@dataclass(frozen=True)
class OcrResult:
    sample_id: str
    raw_text: str
    engine_id: str
    confidence: float | None = None


class OcrEngine(Protocol):
    engine_id: str

    def recognize(self, image: bytes) -> tuple[str, float | None]:
        """Return (raw_text, confidence) for decoded image bytes."""
        ...


class FixtureOcrEngine:
    """Deterministic engine for tests and offline use: canned text keyed
    by the SHA-256 of the image bytes, empty text for unknown images."""

    engine_id = "fixture"

    def __init__(self, table: Mapping[str, str] | None = None):
        self.table = dict(table or {})

    def recognize(self, image: bytes) -> tuple[str, float | None]:
        digest = hashlib.sha256(image).hexdigest()
        if digest in self.table:
            return self.table[digest], 1.0
        return "", None

    @classmethod
    def from_file(cls, path) -> "FixtureOcrEngine":
        return cls(json.loads(Path(path).read_text()))


class HttpOcrEngine:
    """Client for an OCR service exposed over HTTP.

    Contract: POST the raw image bytes; the service answers JSON
    ``{"text": str, "confidence": float|null}``.
    """

    def __init__(self, url: str, timeout: float = 10.0, engine_id: str = "http"):
        self.url = url
        self.timeout = timeout
        self.engine_id = engine_id

    def recognize(self, image: bytes) -> tuple[str, float | None]:
        request = urllib.request.Request(
            self.url, data=image, headers={"Content-Type": "application/octet-stream"}
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                payload = json.loads(response.read().decode("utf-8"))
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise OcrTransportError(f"OCR engine at {self.url} unreachable: {exc}") from exc
        return str(payload.get("text", "")), payload.get("confidence")


def _decode(image: bytes) -> Image.Image:
    try:
        img = Image.open(io.BytesIO(image))
        img.load()
        return img.convert("RGB")
    except (UnidentifiedImageError, OSError) as exc:
        raise OcrError(f"undecodable image: {exc}") from exc


def extract_meme_text(image: bytes, engine: OcrEngine, sample_id: str | None = None) -> OcrResult:
    """Run an OCR engine over one meme, recording engine provenance.

    ``sample_id`` defaults to the content hash of the image bytes.
    """
    _decode(image)
    raw_text, confidence = engine.recognize(image)
    return OcrResult(
        sample_id=sample_id or hashlib.sha256(image).hexdigest(),
        raw_text=raw_text,
        engine_id=engine.engine_id,
        confidence=confidence,
    )


@dataclass(frozen=True)
class MultimodalModelConfig:
    text_encoder_id: str = "mbert"
    image_encoder_id: str = "resnet"
    fusion: str = "concat_mlp"
    learning_rate: float = 2e-5
    epochs: int = 3
    image_size: int = 224
    seed: int = 0
    sublabel_threshold: float = 0.5
    backbone: str = "scratch"
    max_sequence_length: int = 128
    batch_size: int = 8
    hidden_dim: int = 64
    vocab_size: int = 4096

    def __post_init__(self):
        if self.text_encoder_id != "mbert":
            raise ConfigError(f"unknown text_encoder_id {self.text_encoder_id!r}")
        if self.image_encoder_id not in IMAGE_ENCODER_IDS:
            raise ConfigError(f"unknown image_encoder_id {self.image_encoder_id!r}")
        if self.fusion != "concat_mlp":
            raise ConfigError(f"unknown fusion {self.fusion!r}")
        if self.backbone not in BACKBONES:
            raise ConfigError(f"unknown backbone {self.backbone!r}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")
        if self.image_size < 64:
            raise ConfigError("image_size must be at least 64 pixels")
        if not 0.0 <= self.sublabel_threshold <= 1.0:
            raise ConfigError("sublabel_threshold must lie in [0, 1]")

    @property
    def model_id(self) -> str:
        return f"{self.text_encoder_id}_{self.image_encoder_id}"


class FusionModel(nn.Module):
    def __init__(self, text_encoder, image_encoder, n_sublabels: int, hidden: int):
        super().__init__()
        self.text_encoder = text_encoder
        self.image_encoder = image_encoder
        fusion_width = text_encoder.out_dim + image_encoder.out_dim
        self.fusion_width = fusion_width
        self.binary_head = nn.Sequential(
            nn.Linear(fusion_width, hidden), nn.ReLU(), nn.Linear(hidden, 2)
        )
        self.sublabel_head = nn.Sequential(
            nn.Linear(fusion_width, hidden), nn.ReLU(), nn.Linear(hidden, n_sublabels)
        )
        # Fusion-shape check: the concatenated embedding must match the
        # head input declared above.
        head_in = self.binary_head[0].in_features
        if head_in != fusion_width:
            raise ConfigError(
                f"fusion head expects width {head_in}, encoders concatenate to {fusion_width}"
            )

    def forward(self, texts: list[str], images: torch.Tensor):
        text_emb, truncated = self.text_encoder(texts)
        image_emb = self.image_encoder(images)
        fused = torch.cat([text_emb, image_emb], dim=1)
        if fused.shape[1] != self.fusion_width:
            raise ConfigError(
                f"fused width {fused.shape[1]} does not match declared {self.fusion_width}"
            )
        return self.binary_head(fused), self.sublabel_head(fused), truncated


def preprocess_image(image: bytes, image_size: int, mean, std) -> torch.Tensor:
    """Decode, resize and normalize one image. Deterministic: identical
    bytes always produce an identical tensor."""
    pixels = _decode(image).resize((image_size, image_size), Image.BILINEAR)
    array = np.asarray(pixels, dtype=np.float32) / 255.0
    array = (array - np.asarray(mean, dtype=np.float32)) / np.asarray(std, dtype=np.float32)
    return torch.from_numpy(array).permute(2, 0, 1)


@dataclass
class MemeCheckpoint:
    model: FusionModel
    config: MultimodalModelConfig
    channel_mean: tuple[float, float, float] = DEFAULT_CHANNEL_MEAN
    channel_std: tuple[float, float, float] = DEFAULT_CHANNEL_STD
    history: list[dict] = field(default_factory=list)
    modality: str = "meme"

    @property
    def model_id(self) -> str:
        return self.config.model_id

    def predict(self, image: bytes, text: str) -> Prediction:
        return predict_meme(self, image, text)

    def tensorize(self, image: bytes) -> torch.Tensor:
        return preprocess_image(image, self.config.image_size, self.channel_mean, self.channel_std)

    def save(self, out_dir) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        meta = {
            "kind": "meme",
            "model_id": self.model_id,
            "taxonomy": taxonomy_fingerprint("meme"),
            "config": asdict(self.config),
            "text_encoder_build": self.model.text_encoder.build_args(),
            "preprocessing": {
                "image_size": self.config.image_size,
                "channel_mean": list(self.channel_mean),
                "channel_std": list(self.channel_std),
            },
        }
        (out_dir / MODEL_FILE).write_text(json.dumps(meta, indent=2))
        torch.save(self.model.state_dict(), out_dir / WEIGHTS_FILE)
        with open(out_dir / TRAIN_LOG_FILE, "w", encoding="utf-8") as fh:
            for row in self.history:
                fh.write(json.dumps(row) + "\n")
        return out_dir

    @classmethod
    def load(cls, ckpt_dir) -> "MemeCheckpoint":
        ckpt_dir = Path(ckpt_dir)
        meta = json.loads((ckpt_dir / MODEL_FILE).read_text())
        if meta["kind"] != "meme":
            raise ValueError(f"{ckpt_dir} holds a {meta['kind']!r} checkpoint, not meme")
        if meta["taxonomy"] != taxonomy_fingerprint("meme"):
            raise ValueError("checkpoint was trained under a different label taxonomy")
        config = MultimodalModelConfig(**meta["config"])
        text_encoder = ScratchTextEncoder(**meta["text_encoder_build"])
        image_encoder = build_image_encoder(config.image_encoder_id, "scratch", out_dim=config.hidden_dim)
        model = FusionModel(text_encoder, image_encoder, len(MEME_SUBLABELS), config.hidden_dim)
        model.load_state_dict(torch.load(ckpt_dir / WEIGHTS_FILE, map_location="cpu"))
        model.eval()
        pre = meta["preprocessing"]
        return cls(
            model=model,
            config=config,
            channel_mean=tuple(pre["channel_mean"]),
            channel_std=tuple(pre["channel_std"]),
        )


def _check_meme_manifest(manifest: DatasetManifest, role: str):
    if manifest.modality != "meme":
        raise ValueError(f"{role} manifest has modality {manifest.modality!r}, expected meme")
    if manifest.image_root is None:
        raise ValueError(f"{role} manifest has no image_root; load it with load_meme_dataset")
    for sample in manifest.samples:
        if not isinstance(sample, MemeSample):
            raise ValueError(f"{role} manifest contains a non-meme sample {sample.id!r}")


def _load_images(manifest: DatasetManifest) -> list[bytes]:
    root = Path(manifest.image_root)
    return [(root / s.image_ref).read_bytes() for s in manifest.samples]


def train_multimodal_classifier(
    train: DatasetManifest,
    val: DatasetManifest,
    config: MultimodalModelConfig,
    out_dir=None,
) -> tuple[MemeCheckpoint, EvalReport]:
    """Train the late-fusion meme classifier.

    The text branch sees each sample's effective text, i.e. the manually
    corrected OCR where available.
    """
    _check_meme_manifest(train, "train")
    _check_meme_manifest(val, "val")
    if len(train) == 0:
        raise ValueError("training set is empty")

    torch.manual_seed(config.seed)
    text_encoder = build_text_encoder(
        config.text_encoder_id,
        config.backbone,
        max_length=config.max_sequence_length,
        vocab_size=config.vocab_size,
        dim=config.hidden_dim,
    )
    image_encoder = build_image_encoder(config.image_encoder_id, config.backbone, out_dim=config.hidden_dim)
    model = FusionModel(text_encoder, image_encoder, len(MEME_SUBLABELS), config.hidden_dim)
    checkpoint = MemeCheckpoint(model=model, config=config)

    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    ce = nn.CrossEntropyLoss()
    bce = nn.BCEWithLogitsLoss()

    texts = [s.effective_text for s in train.samples]
    tensors = torch.stack([checkpoint.tensorize(raw) for raw in _load_images(train)])
    y_bin = torch.tensor([1 if s.binary_label == "misogynistic" else 0 for s in train.samples])
    y_sub = torch.tensor(
        [[1.0 if lab in s.sublabels else 0.0 for lab in MEME_SUBLABELS] for s in train.samples]
    )
    shuffler = torch.Generator().manual_seed(config.seed)

    for epoch in range(1, config.epochs + 1):
        model.train()
        order = torch.randperm(len(texts), generator=shuffler)
        epoch_loss = 0.0
        for start in range(0, len(texts), config.batch_size):
            idx = order[start : start + config.batch_size]
            logits_bin, logits_sub, _ = model([texts[i] for i in idx], tensors[idx])
            loss = ce(logits_bin, y_bin[idx]) + bce(logits_sub, y_sub[idx])
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += loss.item() * len(idx)
        report = evaluate_meme_checkpoint(checkpoint, val) if len(val) else None
        checkpoint.history.append(
            {
                "epoch": epoch,
                "loss": epoch_loss / len(texts),
                "val_binary_macro_f1": report.binary_macro_f1 if report else None,
            }
        )

    model.eval()
    final_report = evaluate_meme_checkpoint(checkpoint, val if len(val) else train)
    if out_dir is not None:
        checkpoint.save(out_dir)
    return checkpoint, final_report


def predict_meme(checkpoint: MemeCheckpoint, image: bytes, text: str) -> Prediction:
    """Score one meme; ``text`` may be empty (blank or unOCRable meme)."""
    tensor = checkpoint.tensorize(image).unsqueeze(0)
    model = checkpoint.model
    model.eval()
    with torch.no_grad():
        logits_bin, logits_sub, truncated = model([text], tensor)
        p_positive = torch.softmax(logits_bin[0], dim=-1)[1].item()
        sub_scores = torch.sigmoid(logits_sub[0])
    scores = {label: sub_scores[i].item() for i, label in enumerate(MEME_SUBLABELS)}
    return make_prediction(
        "meme",
        p_positive,
        scores,
        checkpoint.config.sublabel_threshold,
        checkpoint.model_id,
        truncated=truncated[0],
    )


def evaluate_meme_checkpoint(checkpoint: MemeCheckpoint, manifest: DatasetManifest) -> EvalReport:
    _check_meme_manifest(manifest, "eval")
    if len(manifest) == 0:
        raise ValueError("evaluation set is empty")
    preds = [
        predict_meme(checkpoint, raw, sample.effective_text)
        for raw, sample in zip(_load_images(manifest), manifest.samples)
    ]
    return evaluate_macro_f1(preds, manifest.samples, modality="meme")


def model_fn_for_image_explanation(checkpoint: MemeCheckpoint, target: str = "binary_positive"):
    """Adapt a checkpoint to the image explainer contract: a callable of
    (RGB uint8 array, text) -> float for the chosen target."""

    def score(pixels: np.ndarray, text: str) -> float:
        buf = io.BytesIO()
        Image.fromarray(pixels).save(buf, format="PNG")
        pred = predict_meme(checkpoint, buf.getvalue(), text)
        if target == "binary_positive":
            return pred.binary_confidence
        return pred.sublabel_scores[target]

    return score


def model_fn_for_text_explanation(checkpoint, target: str = "binary_positive"):
    """Adapt a text checkpoint to the text explainer contract."""

    def score(text: str) -> float:
        pred = checkpoint.predict(text)
        if target == "binary_positive":
            return pred.binary_confidence
        return pred.sublabel_scores[target]

    return score
