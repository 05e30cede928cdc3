"""Exact censuses and main-term predictions for multiplicative Diophantine systems."""

__version__ = "0.1.0"

from .model import (BoxExponents, ExponentSystem, ExponentVector, ParseError, ProblemSpec,
                    Rejected, RestrictionSpec, Shape, ValidationError, WeightTuple,
                    energy_spec, parse_problem, serialize_problem, theorem_spec)
from .intervals import NumericInterval
from .kernels import BACKEND

__all__ = [
    "BACKEND", "BoxExponents", "ExponentSystem", "ExponentVector", "NumericInterval", "ParseError",
    "ProblemSpec", "Rejected", "RestrictionSpec", "Shape", "ValidationError", "WeightTuple",
    "energy_spec", "parse_problem", "serialize_problem", "theorem_spec", "__version__",
]
