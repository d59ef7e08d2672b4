"""Usability-analytics toolkit: UEQ scoring, CUQ scoring and an exact
small-sample Wilcoxon signed-rank test.

The UEQ item-to-dimension mapping and item polarity ship as a data file
(evalkit_data/ueq_items.json) so the scorer stays data-driven. All
scorers are pure functions and never mutate their inputs.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from importlib import resources
from statistics import mean, stdev
from typing import NamedTuple, Sequence

from scipy.stats import rankdata

from . import _accel

UEQ_DIMENSIONS = (
    "attractiveness",
    "perspicuity",
    "efficiency",
    "dependability",
    "stimulation",
    "novelty",
)
UEQ_N_ITEMS = 26
CUQ_N_ITEMS = 16
CUQ_STEP = 100.0 / 64.0  # every CUQ score is a multiple of this
WILCOXON_MAX_N = 25


class EvalkitError(ValueError):
    """Malformed questionnaire data or an invalid test request."""


@dataclass(frozen=True)
class UeqItemSpec:
    index: int
    dimension: str
    positive_pole: int  # 7 when the right anchor is the positive one, else 1
    left: str
    right: str


def load_ueq_items() -> tuple[UeqItemSpec, ...]:
    raw = json.loads(
        resources.files("misodetect").joinpath("evalkit_data/ueq_items.json").read_text()
    )
    return tuple(UeqItemSpec(**item) for item in raw["items"])


@dataclass(frozen=True)
class UeqResponse:
    participant_id: str
    items: tuple[int, ...]

    def __post_init__(self):
        if len(self.items) != UEQ_N_ITEMS:
            raise EvalkitError(
                f"UEQ response needs {UEQ_N_ITEMS} items, got {len(self.items)}"
            )
        for i, value in enumerate(self.items, start=1):
            if not isinstance(value, int) or not 1 <= value <= 7:
                raise EvalkitError(f"UEQ item {i} value {value!r} not an integer in 1..7")


@dataclass(frozen=True)
class CuqResponse:
    participant_id: str
    items: tuple[int, ...]

    def __post_init__(self):
        if len(self.items) != CUQ_N_ITEMS:
            raise EvalkitError(
                f"CUQ response needs {CUQ_N_ITEMS} items, got {len(self.items)}"
            )
        for i, value in enumerate(self.items, start=1):
            if not isinstance(value, int) or not 1 <= value <= 5:
                raise EvalkitError(f"CUQ item {i} value {value!r} not an integer in 1..5")


@dataclass(frozen=True)
class DimensionStats:
    mean: float
    sd: float
    ci95: tuple[float, float]
    n: int


@dataclass(frozen=True)
class UeqReport:
    dimensions: dict[str, DimensionStats]
    overall: dict[str, float]  # participant -> mean of the six dimension scores
    per_participant: dict[str, dict[str, float]]


def transform_ueq_item(value: int, positive_pole: int) -> int:
    """Map a raw 1..7 answer to -3..+3, sign-flipped when the positive
    anchor sits at 1. Self-inverse under a second flip."""
    centered = value - 4
    return centered if positive_pole == 7 else -centered


def _stats_over(values: Sequence[float]) -> DimensionStats:
    n = len(values)
    m = mean(values)
    sd = stdev(values) if n > 1 else 0.0  # undefined at n=1, reported as 0 with n flagging it
    half = 1.96 * sd / n**0.5
    return DimensionStats(mean=m, sd=sd, ci95=(m - half, m + half), n=n)


def score_ueq(responses: Sequence[UeqResponse]) -> UeqReport:
    """Per-dimension descriptive statistics over participants plus each
    participant's overall score (mean of their six dimension scores)."""
    if not responses:
        raise EvalkitError("need at least one UEQ response")
    specs = load_ueq_items()
    per_participant: dict[str, dict[str, float]] = {}
    for response in responses:
        by_dim: dict[str, list[int]] = {d: [] for d in UEQ_DIMENSIONS}
        for spec, raw in zip(specs, response.items):
            by_dim[spec.dimension].append(transform_ueq_item(raw, spec.positive_pole))
        per_participant[response.participant_id] = {
            dim: mean(values) for dim, values in by_dim.items()
        }
    dimensions = {
        dim: _stats_over([scores[dim] for scores in per_participant.values()])
        for dim in UEQ_DIMENSIONS
    }
    overall = {
        pid: mean(scores[d] for d in UEQ_DIMENSIONS) for pid, scores in per_participant.items()
    }
    return UeqReport(dimensions=dimensions, overall=overall, per_participant=per_participant)


def score_cuq(response: CuqResponse) -> float:
    """CUQ score on 0..100: ((sum_odd - 8) + (40 - sum_even)) * 100/64.

    Odd-numbered items are positively phrased, even-numbered negatively;
    the result always lands on the grid of multiples of 1.5625.
    """
    odd = sum(response.items[0::2])
    even = sum(response.items[1::2])
    return ((odd - 8) + (40 - even)) * 100.0 / 64.0


class WilcoxonResult(NamedTuple):
    statistic: float  # W+: rank sum of the positive differences
    p_value: float
    n: int  # pairs remaining after zero differences are dropped
    p_exact: Fraction


def wilcoxon_exact(
    x: Sequence[float], y: Sequence[float] | None = None, mu: float = 0.0
) -> WilcoxonResult:
    """Exact two-sided Wilcoxon signed-rank test for small samples.

    Paired when ``y`` is given, otherwise one-sample against the constant
    ``mu``. Zero differences are dropped; tied magnitudes receive
    mid-ranks. The p-value enumerates all 2**m sign assignments exactly
    (m <= 25), as a rational kept alongside the float.
    """
    if y is not None:
        if len(x) != len(y):
            raise EvalkitError(f"paired samples differ in length: {len(x)} vs {len(y)}")
        diffs = [float(a) - float(b) for a, b in zip(x, y)]
    else:
        diffs = [float(a) - mu for a in x]
    nonzero = [d for d in diffs if d != 0.0]
    m = len(nonzero)
    if m == 0:
        raise EvalkitError("all differences are zero; the test statistic is undefined")
    if m > WILCOXON_MAX_N:
        raise EvalkitError(
            f"exact enumeration supports at most {WILCOXON_MAX_N} nonzero differences, got {m}"
        )
    ranks = rankdata([abs(d) for d in nonzero])
    w_plus = float(sum(r for r, d in zip(ranks, nonzero) if d > 0))
    doubled = [int(round(2 * r)) for r in ranks]  # mid-ranks become exact integers
    counts = _accel.signed_rank_counts(doubled)
    w2 = int(round(2 * w_plus))
    total = Fraction(1 << m)
    p_ge = Fraction(int(counts[w2:].sum())) / total
    p_le = Fraction(int(counts[: w2 + 1].sum())) / total
    p = min(Fraction(1), 2 * min(p_ge, p_le))
    return WilcoxonResult(statistic=w_plus, p_value=float(p), n=m, p_exact=p)


def format_p(p: float) -> str:
    """Display rounding: half-even to three decimals."""
    return str(Decimal(repr(float(p))).quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN))


def read_ueq_csv(path) -> list[UeqResponse]:
    """One row per participant: participant_id,item_1..item_26."""
    return _read_questionnaire_csv(path, UEQ_N_ITEMS, UeqResponse)


def read_cuq_csv(path) -> list[CuqResponse]:
    """One row per participant: participant_id,item_1..item_16."""
    return _read_questionnaire_csv(path, CUQ_N_ITEMS, CuqResponse)


def _read_questionnaire_csv(path, n_items: int, factory):
    responses = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = ["participant_id"] + [f"item_{i}" for i in range(1, n_items + 1)]
        if reader.fieldnames is None or list(reader.fieldnames) != expected:
            raise EvalkitError(
                f"expected CSV header {','.join(expected)}, got {reader.fieldnames}"
            )
        for row_no, row in enumerate(reader, start=2):
            try:
                items = tuple(int(row[f"item_{i}"]) for i in range(1, n_items + 1))
            except (TypeError, ValueError) as exc:
                raise EvalkitError(f"row {row_no}: non-integer item value ({exc})") from exc
            responses.append(factory(participant_id=row["participant_id"], items=items))
    return responses
