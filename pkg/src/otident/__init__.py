"""Identified sets for moment models under data combination, via optimal transport."""

from .dream import DreamSolution, PartialOtInstance, canonical_order, narrow_bracket, solve_dream
from .measures import (
    ConditionalLawTable,
    DiscreteDist,
    GaussianSpec,
    LawRow,
    discretize_gaussian,
    make_discrete,
)
from .quantile_ot import antitone_integral, comonotone_integral, frechet_bounds, to_step_quantile

__version__ = "0.1.0"

__all__ = [
    "ConditionalLawTable",
    "DiscreteDist",
    "DreamSolution",
    "GaussianSpec",
    "LawRow",
    "PartialOtInstance",
    "antitone_integral",
    "canonical_order",
    "comonotone_integral",
    "discretize_gaussian",
    "frechet_bounds",
    "make_discrete",
    "narrow_bracket",
    "solve_dream",
    "to_step_quantile",
]
