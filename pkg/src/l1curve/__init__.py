"""Exact construction and verification of a smooth-image, nowhere
differentiable isometric embedding of [0, 1] into L1[0, 1]."""

from .curve import (
    Dyadic,
    EvalResult,
    consecutive_difference,
    derivative_bound,
    eval_F_complex,
    eval_F_dyadic,
    eval_F_real,
    interval_word,
    p_sequence,
    shape_word,
)
from .exact import Enclosure, Polynomial
from .schedule import (
    CurveModel,
    OmegaSpec,
    ShapeNode,
    build_model,
    choose_k,
    deserialize_model,
    serialize_model,
    split_density,
)

__all__ = [
    "CurveModel", "Dyadic", "Enclosure", "EvalResult", "OmegaSpec", "Polynomial",
    "ShapeNode", "build_model", "choose_k", "consecutive_difference", "derivative_bound",
    "deserialize_model", "eval_F_complex", "eval_F_dyadic", "eval_F_real",
    "interval_word", "p_sequence", "serialize_model", "shape_word", "split_density",
]
