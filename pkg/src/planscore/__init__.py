"""Extract room-connectivity graphs from standardized floor-plan drawings and score them."""

from .extractor import extract
from .graph import FloorPlanIR, deserialize, serialize, to_graph
from .harness import aggregate, batch_score, score_submission
from .raster import ColorClass, PixelGrid, classify_color, load_image
from .scorer import ScoreBreakdown, composite_score
from .svg import parse_svg, rasterize
from .synth import SynthConfig, SynthPlan, generate, perturb, random_baseline, render_to_svg
from .validator import RuleViolation, validate

__all__ = [
    "ColorClass",
    "FloorPlanIR",
    "PixelGrid",
    "RuleViolation",
    "ScoreBreakdown",
    "SynthConfig",
    "SynthPlan",
    "aggregate",
    "batch_score",
    "classify_color",
    "composite_score",
    "deserialize",
    "extract",
    "generate",
    "load_image",
    "parse_svg",
    "perturb",
    "random_baseline",
    "rasterize",
    "render_to_svg",
    "score_submission",
    "serialize",
    "to_graph",
    "validate",
]
