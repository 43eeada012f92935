"""Weighted topological entropy and pressure of factor maps between subshifts."""

from .errors import CapExceeded, ConvergenceError, SpecError, WentroError
from .symbolic import (
    Alphabet,
    BlockCode,
    FactorPair,
    Sft,
    SoficPresentation,
    count_words,
    enumerate_words,
    higher_block_recode,
    image_presentation,
    perron_entropy,
    validate_factor_pair,
)
from .cover import (
    GrowthSequence,
    Potential,
    amplification_check,
    growth_limit_bounds,
    separated_lower_bound,
    sup_birkhoff,
    weighted_partition_sum,
)

__all__ = [
    "Alphabet",
    "BlockCode",
    "CapExceeded",
    "ConvergenceError",
    "FactorPair",
    "GrowthSequence",
    "Potential",
    "Sft",
    "SoficPresentation",
    "SpecError",
    "WentroError",
    "amplification_check",
    "count_words",
    "enumerate_words",
    "growth_limit_bounds",
    "higher_block_recode",
    "image_presentation",
    "perron_entropy",
    "separated_lower_bound",
    "sup_birkhoff",
    "validate_factor_pair",
    "weighted_partition_sum",
]

__version__ = "0.1.0"
