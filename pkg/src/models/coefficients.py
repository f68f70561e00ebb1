"""Value types produced by the energy model."""

import math
from dataclasses import dataclass
from typing import Tuple

from .errors import DomainError
from .word import Word

CENTER_RADIUS = 1e-14
DISK_RADIUS = 1.0 / math.sqrt(6.0)  # boundary of the simplex disk


@dataclass(frozen=True)
class BVector:
    """Normalized coefficients (b_1, b_2, b_3) indexed by the corner symbols."""

    b: Tuple[float, float, float]

    def sum_squares(self) -> float:
        return sum(x * x for x in self.b)

    def centered_sum_squares(self) -> float:
        """sum_j (b_j - 1/3)^2, which is below 1/6 inside the disk."""
        return sum((x - 1.0 / 3.0) ** 2 for x in self.b)

    def is_valid(self, tol: float = 1e-12) -> bool:
        return (
            all(x > 0 for x in self.b)
            and abs(sum(self.b) - 1.0) <= tol
            and self.sum_squares() < 0.5
        )

    def validate(self, tol: float = 1e-12) -> None:
        if not self.is_valid(tol):
            raise DomainError(f"not a point of the simplex disk: {self.b}")


@dataclass(frozen=True)
class PolarPoint:
    """Polar coordinates of a BVector around c = (1/3, 1/3, 1/3)."""

    radius: float
    theta: float  # in (-pi, pi]; 0 when center is set
    center: bool = False  # radius below CENTER_RADIUS, angle undefined


@dataclass(frozen=True)
class TildeOperator:
    """Restriction B_w of P A_w to the mean-zero plane, in the a1/a2 basis."""

    matrix: Tuple[Tuple[float, float], Tuple[float, float]]
    det: float
    norm: float  # largest singular value
    det_ratio: float  # det^2 / norm^4


@dataclass(frozen=True)
class WordCoefficients:
    """Everything the ``coeffs`` command reports for one word."""

    word: Word
    a: Tuple[float, float, float]
    b: BVector
    polar: PolarPoint

    @property
    def sum_squares(self) -> float:
        return self.b.sum_squares()
