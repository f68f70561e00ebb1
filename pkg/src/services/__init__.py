"""Services for structure building, energy evaluation, enumeration and verification."""

from .structure_builder import StructureBuilder
from .energy_model import EnergyModel
from .word_enumerator import WordEnumerator, WordMeasure
from .histogram_service import HistogramService
from .montecarlo import MonteCarloService
from .theorem_verifier import TheoremVerifier

__all__ = [
    "StructureBuilder",
    "EnergyModel",
    "WordEnumerator",
    "WordMeasure",
    "HistogramService",
    "MonteCarloService",
    "TheoremVerifier",
]
