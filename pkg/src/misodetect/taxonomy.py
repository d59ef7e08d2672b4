"""Label taxonomies shared across the workbench.

Text comments carry a binary label plus a ten-way fine-grained sublabel
set; memes carry a binary label plus a three-way sublabel set. The string
identifiers below are the stable wire/storage form everywhere (datasets,
checkpoints, API payloads).
"""

from __future__ import annotations

import hashlib
import json

# Binary labels per modality.
TEXT_NEGATIVE = "non_offensive"
TEXT_POSITIVE = "misogynistic"
MEME_NEGATIVE = "normal"
MEME_POSITIVE = "misogynistic"

TEXT_BINARY_LABELS = (TEXT_NEGATIVE, TEXT_POSITIVE)
MEME_BINARY_LABELS = (MEME_NEGATIVE, MEME_POSITIVE)

# Fine-grained sublabels, in canonical order.
TEXT_SUBLABELS = (
    "derogatory_language",
    "threats_violence",
    "slut_shaming",
    "objectification_dehumanization",
    "body_shaming",
    "victim_blaming",
    "stereotyping",
    "minimization_trivialization",
    "sexual_harassment",
    "moral_policing",
)

MEME_SUBLABELS = (
    "objectification",
    "prejudice",
    "humiliation",
)


def sublabels_for(modality: str) -> tuple[str, ...]:
    if modality == "text":
        return TEXT_SUBLABELS
    if modality == "meme":
        return MEME_SUBLABELS
    raise ValueError(f"unknown modality: {modality!r}")


def binary_labels_for(modality: str) -> tuple[str, str]:
    """(negative, positive) binary label pair for a modality."""
    if modality == "text":
        return TEXT_BINARY_LABELS
    if modality == "meme":
        return MEME_BINARY_LABELS
    raise ValueError(f"unknown modality: {modality!r}")


def taxonomy_fingerprint(modality: str) -> str:
    """Stable digest of the label set, stored in checkpoints so a model is
    never applied under a different taxonomy than it was trained with."""
    payload = json.dumps(
        {"binary": binary_labels_for(modality), "sublabels": sublabels_for(modality)},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
