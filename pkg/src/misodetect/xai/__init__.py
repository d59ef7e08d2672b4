"""Model-agnostic explanation engine: LIME and Kernel SHAP over text
tokens and image regions, with an exact-Shapley enumeration oracle."""

from .game import MAX_EXACT_PLAYERS, CoalitionGame, exact_shapley
from .image import SaliencyMap, explain_image, grid_segmentation
from .render import render_saliency_overlay
from .solvers import EXHAUSTIVE_LIMIT, XaiError
from .text import (
    BINARY_TARGET,
    AttributionReport,
    TokenAttribution,
    explain_text,
    report_from_dict,
    word_spans,
)

__all__ = [
    "AttributionReport",
    "BINARY_TARGET",
    "CoalitionGame",
    "EXHAUSTIVE_LIMIT",
    "MAX_EXACT_PLAYERS",
    "SaliencyMap",
    "TokenAttribution",
    "XaiError",
    "exact_shapley",
    "explain_image",
    "explain_text",
    "grid_segmentation",
    "render_saliency_overlay",
    "report_from_dict",
    "word_spans",
]
