"""Belief-structured matrix factorization for polarized social data."""

from .belief import BeliefMixture, identity, parse_belief, star_structure
from .errors import BsmfError, InputError, ModeError, OptimizerError, ShapeError, ValidationError
from .factorization import MULTIPLICATIVE, FactorPair, FitConfig, FitResult, Mode, fit, loss
from .pipeline import PipelineResult, Stages, run

__all__ = [
    "BeliefMixture",
    "BsmfError",
    "FactorPair",
    "FitConfig",
    "FitResult",
    "InputError",
    "MULTIPLICATIVE",
    "Mode",
    "ModeError",
    "OptimizerError",
    "PipelineResult",
    "ShapeError",
    "Stages",
    "ValidationError",
    "fit",
    "identity",
    "loss",
    "parse_belief",
    "run",
    "star_structure",
]
