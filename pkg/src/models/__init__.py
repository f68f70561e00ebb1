"""Value types for structures, words, coefficients, histograms and reports."""

from .errors import (
    ConfigError,
    DepthCapError,
    DomainError,
    GasketError,
    PreconditionError,
    StructureError,
    UnsupportedStructureError,
)
from .lattice import BarycentricPoint, SelfSimilarStructure
from .harmonic_structure import A2Report, HarmonicStructure
from .word import Word
from .coefficients import BVector, PolarPoint, TildeOperator, WordCoefficients
from .histogram import WeightedHistogram
from .report import VerificationReport, Witness
from .run_config import RunConfig

__all__ = [
    "ConfigError",
    "DepthCapError",
    "DomainError",
    "GasketError",
    "PreconditionError",
    "StructureError",
    "UnsupportedStructureError",
    "BarycentricPoint",
    "SelfSimilarStructure",
    "A2Report",
    "HarmonicStructure",
    "Word",
    "BVector",
    "PolarPoint",
    "TildeOperator",
    "WordCoefficients",
    "WeightedHistogram",
    "VerificationReport",
    "Witness",
    "RunConfig",
]
