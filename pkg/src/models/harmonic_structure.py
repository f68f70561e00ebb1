"""Harmonic structure (D, r) together with its extension matrices."""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .lattice import SelfSimilarStructure

Scalar = Union[Fraction, float]
Matrix3 = Tuple[Tuple[Scalar, ...], ...]


@dataclass(frozen=True)
class HarmonicStructure:
    """Regular harmonic structure with uniform resistance r.

    Entries are ``Fraction`` for the exact backend and ``float`` for the float
    backend; ``backend`` records which.
    """

    structure: SelfSimilarStructure
    d_matrix: Matrix3
    r: Scalar
    a_maps: Tuple[Matrix3, ...]  # indexed by symbol
    gamma: Scalar  # D^2 = -gamma D
    u_vectors: Tuple[Tuple[Scalar, ...], ...]  # u_j, j in S0
    v_vectors: Tuple[Tuple[Scalar, ...], ...]  # v_j with (u_j, v_j) = 1
    backend: str = "exact"
    schur_complement: Optional[Matrix3] = None  # G' on V0, equals r * D

    @property
    def level(self) -> int:
        return self.structure.level

    @property
    def is_exact(self) -> bool:
        return self.backend == "exact"

    def d_array(self) -> np.ndarray:
        return np.array(self.d_matrix, dtype=float)

    def a_array(self) -> np.ndarray:
        """All extension matrices as a float array of shape (#S, 3, 3)."""
        return np.array(self.a_maps, dtype=float)

    def u_array(self) -> np.ndarray:
        return np.array(self.u_vectors, dtype=float)

    def v_array(self) -> np.ndarray:
        return np.array(self.v_vectors, dtype=float)


@dataclass
class A2Report:
    """Determinants of the extension matrices; all nonzero means every A_i is invertible."""

    level: int
    backend: str
    determinants: List[Scalar] = field(default_factory=list)
    zero_symbols: List[int] = field(default_factory=list)  # 1-based symbols with det 0
    min_abs_det: Optional[Scalar] = None

    @property
    def all_invertible(self) -> bool:
        return not self.zero_symbols

    def to_dict(self) -> Dict[str, Any]:
        from ..utils.output import format_scalar

        return {
            "level": self.level,
            "backend": self.backend,
            "determinants": [format_scalar(d) for d in self.determinants],
            "zero_symbols": list(self.zero_symbols),
            "min_abs_det": format_scalar(self.min_abs_det)
            if self.min_abs_det is not None
            else None,
            "all_invertible": self.all_invertible,
        }
