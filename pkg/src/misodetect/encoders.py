"""Text and image encoders behind a common embedding interface.

Two tiers share each architecture family's identity:

* ``scratch`` - compact randomly initialized encoders trained end to end.
  Self-contained and fast on CPU; this is what the test fixtures and the
  offline workbench use.
* ``hf`` - full pretrained backbones pulled from public model hubs
  (requires the ``pretrained`` extra and network access).

Text encoders consume raw strings (tokenization lives inside the module
so checkpoints stay self-describing) and return pooled embeddings plus a
per-item truncation flag.
"""

from __future__ import annotations

import zlib

import torch
from torch import nn

TEXT_ENCODER_IDS = ("mbert", "xlmr")
IMAGE_ENCODER_IDS = ("resnet", "efficientnet")
BACKBONES = ("scratch", "hf")

PAD_ID = 0
BOS_ID = 1
MASK_ID = 2
N_SPECIALS = 3
MASK_TOKEN = "[MASK]"


class HashingTokenizer:
    """Deterministic word-level tokenizer using the hashing trick.

    CRC32 keeps ids stable across platforms and processes; no vocabulary
    file is needed, which suits noisy code-mixed text with inconsistent
    spellings.
    """

    def __init__(self, vocab_size: int = 4096, lowercase: bool = True):
        self.vocab_size = vocab_size
        self.lowercase = lowercase

    def token_id(self, token: str) -> int:
        if token == MASK_TOKEN:
            return MASK_ID
        if self.lowercase:
            token = token.lower()
        return N_SPECIALS + zlib.crc32(token.encode("utf-8")) % (self.vocab_size - N_SPECIALS)

    def encode(self, text: str, max_length: int) -> tuple[list[int], bool]:
        """Token ids (with leading BOS) and whether truncation happened."""
        ids = [BOS_ID] + [self.token_id(tok) for tok in text.split()]
        truncated = len(ids) > max_length
        return ids[:max_length], truncated

    def to_dict(self) -> dict:
        return {"vocab_size": self.vocab_size, "lowercase": self.lowercase}


class ScratchTextEncoder(nn.Module):
    """Small transformer encoder trained from scratch.

    The two encoder ids map to the two pooling conventions of their full
    counterparts: first-token pooling for mbert, masked mean pooling for
    xlmr.
    """

    def __init__(
        self,
        encoder_id: str,
        vocab_size: int = 4096,
        dim: int = 64,
        n_layers: int = 2,
        n_heads: int = 4,
        max_length: int = 128,
    ):
        super().__init__()
        if encoder_id not in TEXT_ENCODER_IDS:
            raise ValueError(f"unknown text encoder {encoder_id!r}")
        self.encoder_id = encoder_id
        self.out_dim = dim
        self.max_length = max_length
        self.tokenizer = HashingTokenizer(vocab_size=vocab_size)
        self.embed = nn.Embedding(vocab_size, dim, padding_idx=PAD_ID)
        self.pos = nn.Embedding(max_length, dim)
        layer = nn.TransformerEncoderLayer(
            d_model=dim,
            nhead=n_heads,
            dim_feedforward=4 * dim,
            dropout=0.0,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=n_layers)

    def forward(self, texts: list[str]) -> tuple[torch.Tensor, list[bool]]:
        encoded = [self.tokenizer.encode(t, self.max_length) for t in texts]
        flags = [trunc for _, trunc in encoded]
        width = max(len(ids) for ids, _ in encoded)
        batch = torch.full((len(texts), width), PAD_ID, dtype=torch.long)
        for row, (ids, _) in enumerate(encoded):
            batch[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        padding = batch.eq(PAD_ID)
        positions = torch.arange(width).unsqueeze(0)
        hidden = self.embed(batch) + self.pos(positions)
        hidden = self.encoder(hidden, src_key_padding_mask=padding)
        if self.encoder_id == "mbert":
            pooled = hidden[:, 0]
        else:
            keep = (~padding).unsqueeze(-1).float()
            pooled = (hidden * keep).sum(dim=1) / keep.sum(dim=1).clamp(min=1.0)
        return pooled, flags

    def build_args(self) -> dict:
        return {
            "encoder_id": self.encoder_id,
            "vocab_size": self.tokenizer.vocab_size,
            "dim": self.out_dim,
            "n_layers": self.encoder.num_layers,
            "n_heads": self.encoder.layers[0].self_attn.num_heads,
            "max_length": self.max_length,
        }


class _ResidualBlock(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, channels, 3, padding=1, bias=False)
        self.conv2 = nn.Conv2d(channels, channels, 3, padding=1, bias=False)
        self.norm1 = nn.GroupNorm(4, channels)
        self.norm2 = nn.GroupNorm(4, channels)

    def forward(self, x):
        out = torch.relu(self.norm1(self.conv1(x)))
        out = self.norm2(self.conv2(out))
        return torch.relu(out + x)


class ScratchResNet(nn.Module):
    """Miniature residual CNN (stand-in for the ResNet capacity tier)."""

    def __init__(self, out_dim: int = 64):
        super().__init__()
        self.out_dim = out_dim
        self.stem = nn.Sequential(
            nn.Conv2d(3, 16, 5, stride=2, padding=2, bias=False), nn.GroupNorm(4, 16), nn.ReLU()
        )
        self.stage1 = _ResidualBlock(16)
        self.down = nn.Sequential(
            nn.Conv2d(16, 32, 3, stride=2, padding=1, bias=False), nn.GroupNorm(4, 32), nn.ReLU()
        )
        self.stage2 = _ResidualBlock(32)
        self.head = nn.Linear(32, out_dim)

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        x = self.stage2(self.down(self.stage1(self.stem(images))))
        pooled = x.mean(dim=(2, 3))
        return self.head(pooled)


class _SeparableBlock(nn.Module):
    def __init__(self, cin: int, cout: int, stride: int):
        super().__init__()
        self.depthwise = nn.Conv2d(cin, cin, 3, stride=stride, padding=1, groups=cin, bias=False)
        self.pointwise = nn.Conv2d(cin, cout, 1, bias=False)
        self.norm = nn.GroupNorm(4, cout)

    def forward(self, x):
        return torch.relu(self.norm(self.pointwise(self.depthwise(x))))


class ScratchEfficientNet(nn.Module):
    """Miniature depthwise-separable CNN (EfficientNet capacity tier)."""

    def __init__(self, out_dim: int = 64):
        super().__init__()
        self.out_dim = out_dim
        self.stem = nn.Sequential(
            nn.Conv2d(3, 16, 3, stride=2, padding=1, bias=False), nn.GroupNorm(4, 16), nn.ReLU()
        )
        self.blocks = nn.Sequential(
            _SeparableBlock(16, 24, stride=1),
            _SeparableBlock(24, 32, stride=2),
            _SeparableBlock(32, 32, stride=1),
        )
        self.head = nn.Linear(32, out_dim)

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        x = self.blocks(self.stem(images))
        return self.head(x.mean(dim=(2, 3)))


HF_TEXT_MODELS = {"mbert": "bert-base-multilingual-cased", "xlmr": "xlm-roberta-base"}


class PretrainedTextEncoder(nn.Module):
    """Adapter over a hub transformer; needs the ``pretrained`` extra and
    downloadable weights, so it is never exercised by the offline tests."""

    def __init__(self, encoder_id: str, max_length: int = 128):
        super().__init__()
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise RuntimeError(
                "the 'pretrained' extra is required for hf backbones: pip install misodetect[pretrained]"
            ) from exc
        name = HF_TEXT_MODELS[encoder_id]
        self.encoder_id = encoder_id
        self.max_length = max_length
        self.hf_tokenizer = AutoTokenizer.from_pretrained(name)
        self.model = AutoModel.from_pretrained(name)
        self.out_dim = self.model.config.hidden_size

    def forward(self, texts: list[str]) -> tuple[torch.Tensor, list[bool]]:
        batch = self.hf_tokenizer(
            texts, return_tensors="pt", padding=True, truncation=True, max_length=self.max_length
        )
        lengths = [len(self.hf_tokenizer(t)["input_ids"]) for t in texts]
        flags = [n > self.max_length for n in lengths]
        hidden = self.model(**batch).last_hidden_state
        return hidden[:, 0], flags


def build_text_encoder(encoder_id: str, backbone: str, max_length: int, **scratch_args):
    if backbone == "scratch":
        return ScratchTextEncoder(encoder_id, max_length=max_length, **scratch_args)
    if backbone == "hf":
        return PretrainedTextEncoder(encoder_id, max_length=max_length)
    raise ValueError(f"unknown backbone {backbone!r}")


def build_image_encoder(image_encoder_id: str, backbone: str, out_dim: int = 64):
    if image_encoder_id not in IMAGE_ENCODER_IDS:
        raise ValueError(f"unknown image encoder {image_encoder_id!r}")
    if backbone == "scratch":
        cls = ScratchResNet if image_encoder_id == "resnet" else ScratchEfficientNet
        return cls(out_dim=out_dim)
    if backbone == "hf":
        return _pretrained_image_encoder(image_encoder_id)
    raise ValueError(f"unknown backbone {backbone!r}")


def _pretrained_image_encoder(image_encoder_id: str):
    try:
        import torchvision.models as tvm
    except ImportError as exc:
        raise RuntimeError(
            "the 'pretrained' extra is required for hf backbones: pip install misodetect[pretrained]"
        ) from exc
    if image_encoder_id == "resnet":
        model = tvm.resnet50(weights=tvm.ResNet50_Weights.DEFAULT)
        model.out_dim = model.fc.in_features
        model.fc = nn.Identity()
    else:
        model = tvm.efficientnet_b0(weights=tvm.EfficientNet_B0_Weights.DEFAULT)
        model.out_dim = model.classifier[1].in_features
        model.classifier = nn.Identity()
    return model
