"""Prediction and evaluation-report types shared by both classifiers.

Conventions fixed here: ``binary_confidence`` is the probability of the
positive (misogynistic) class, the binary decision flips at 0.5, and a
sublabel is active when its score reaches the configured threshold.
Per-class F1 uses the 0/0 -> 0 convention so degenerate classes never
poison a macro average.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .taxonomy import binary_labels_for, sublabels_for


@dataclass(frozen=True)
class Prediction:
    binary_label: str
    binary_confidence: float
    sublabel_scores: Mapping[str, float]
    active_sublabels: tuple[str, ...]
    model_id: str
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "binary_label": self.binary_label,
            "binary_confidence": self.binary_confidence,
            "sublabel_scores": dict(self.sublabel_scores),
            "active_sublabels": list(self.active_sublabels),
            "model_id": self.model_id,
            "truncated": self.truncated,
        }


def make_prediction(
    modality: str,
    p_positive: float,
    sublabel_scores: Mapping[str, float],
    threshold: float,
    model_id: str,
    truncated: bool = False,
) -> Prediction:
    """Assemble a Prediction whose invariants hold by construction."""
    negative, positive = binary_labels_for(modality)
    p_positive = float(p_positive)
    if not 0.0 <= p_positive <= 1.0:
        raise ValueError(f"binary confidence {p_positive} outside [0, 1]")
    order = sublabels_for(modality)
    scores = {}
    for label in order:
        score = float(sublabel_scores[label])
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"sublabel score {label}={score} outside [0, 1]")
        scores[label] = score
    active = tuple(label for label in order if scores[label] >= threshold)
    return Prediction(
        binary_label=positive if p_positive >= 0.5 else negative,
        binary_confidence=p_positive,
        sublabel_scores=scores,
        active_sublabels=active,
        model_id=model_id,
        truncated=truncated,
    )


@dataclass(frozen=True)
class EvalReport:
    binary_macro_f1: float
    multilabel_macro_f1: float
    per_label_f1: Mapping[str, float]
    support: Mapping[str, int]

    def to_dict(self) -> dict:
        return {
            "binary_macro_f1": self.binary_macro_f1,
            "multilabel_macro_f1": self.multilabel_macro_f1,
            "per_label_f1": dict(self.per_label_f1),
            "support": dict(self.support),
        }


def _f1(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 0.0 if denom == 0 else 2 * tp / denom


def per_class_f1(gold: Sequence[str], pred: Sequence[str], labels: Sequence[str]) -> dict[str, float]:
    """One F1 per class over single-label gold/pred sequences."""
    if len(gold) != len(pred):
        raise ValueError(f"length mismatch: {len(gold)} gold vs {len(pred)} predictions")
    out = {}
    for label in labels:
        tp = sum(1 for g, p in zip(gold, pred) if g == label and p == label)
        fp = sum(1 for g, p in zip(gold, pred) if g != label and p == label)
        fn = sum(1 for g, p in zip(gold, pred) if g == label and p != label)
        out[label] = _f1(tp, fp, fn)
    return out


def per_label_f1_multilabel(
    gold: Sequence[frozenset | set], pred: Sequence[frozenset | set], labels: Sequence[str]
) -> dict[str, float]:
    """One-vs-rest F1 per label over label-set sequences."""
    if len(gold) != len(pred):
        raise ValueError(f"length mismatch: {len(gold)} gold vs {len(pred)} predictions")
    out = {}
    for label in labels:
        tp = sum(1 for g, p in zip(gold, pred) if label in g and label in p)
        fp = sum(1 for g, p in zip(gold, pred) if label not in g and label in p)
        fn = sum(1 for g, p in zip(gold, pred) if label in g and label not in p)
        out[label] = _f1(tp, fp, fn)
    return out


def macro(values: Mapping[str, float]) -> float:
    return sum(values.values()) / len(values) if values else 0.0


def evaluate_macro_f1(
    predictions: Sequence[Prediction], gold: Sequence, modality: str | None = None
) -> EvalReport:
    """Score predictions against gold samples (anything exposing
    ``binary_label`` and ``sublabels``), reporting unweighted macro-F1 for
    the binary and multilabel tasks plus per-label detail and support.

    With ``modality`` set, the class inventory is the full taxonomy, so
    classes absent from this batch contribute F1 = 0 to the macro;
    without it, the observed label union is used (abstract fixtures).
    """
    if len(predictions) != len(gold):
        raise ValueError(f"length mismatch: {len(gold)} gold vs {len(predictions)} predictions")
    if not predictions:
        raise ValueError("nothing to evaluate")
    if modality is not None:
        binary_labels = list(binary_labels_for(modality))
        sublabels = list(sublabels_for(modality))
    else:
        binary_labels = sorted(
            {g.binary_label for g in gold} | {p.binary_label for p in predictions}
        )
        sublabels = sorted(
            set().union(*(set(g.sublabels) for g in gold))
            | set().union(*(set(p.active_sublabels) for p in predictions))
        )
    binary = per_class_f1(
        [g.binary_label for g in gold], [p.binary_label for p in predictions], binary_labels
    )
    multilabel = per_label_f1_multilabel(
        [frozenset(g.sublabels) for g in gold],
        [frozenset(p.active_sublabels) for p in predictions],
        sublabels,
    )
    support: dict[str, int] = {}
    for label in binary_labels:
        support[label] = sum(1 for g in gold if g.binary_label == label)
    for label in sublabels:
        support[label] = sum(1 for g in gold if label in g.sublabels)
    return EvalReport(
        binary_macro_f1=macro(binary),
        multilabel_macro_f1=macro(multilabel),
        per_label_f1={**binary, **multilabel},
        support=support,
    )
