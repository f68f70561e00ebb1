"""Weighted histogram model for the image measures of the b-coefficients."""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np


@dataclass
class WeightedHistogram:
    """Bins are half-open [lo_i, hi_i) except the last one, which is closed."""

    lo: float
    hi: float
    mass: np.ndarray  # per-bin mass
    out_of_range_mass: float = 0.0
    kind: str = "theta"
    symmetric_binning: bool = False  # sector-canonical theta binning was used
    rotation_defect: Optional[float] = None  # max |P(I) - P(I + 2pi/3)|
    reflection_defect: Optional[float] = None  # max |P(I) - P(reflected I)|

    @property
    def bins(self) -> int:
        return int(self.mass.shape[0])

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.bins

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum()) + self.out_of_range_mass

    def edges(self) -> np.ndarray:
        return self.lo + self.width * np.arange(self.bins + 1)

    def rows(self) -> List[Tuple[float, float, float]]:
        """(bin_lo, bin_hi, mass) rows for CSV output."""
        edges = self.edges()
        edges[-1] = self.hi
        return [
            (float(edges[i]), float(edges[i + 1]), float(self.mass[i]))
            for i in range(self.bins)
        ]

    def mean(self) -> float:
        """Mass-weighted mean of bin centers."""
        edges = self.edges()
        centers = (edges[:-1] + edges[1:]) / 2.0
        inside = float(self.mass.sum())
        if inside == 0:
            return 0.0
        return float(np.dot(centers, self.mass) / inside)
