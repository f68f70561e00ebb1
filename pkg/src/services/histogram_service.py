"""Histograms P_m (angle) and Q_m (radius) of the b-coefficient image measures.

Angles are binned on a global grid of N bins over (-pi, pi]. When N is a
multiple of 6 every point is binned through its Weyl sector: the sorted
coefficients give a position t inside the canonical sector, and the sector
(from the positions of the largest and smallest coefficient) places it on the
circle with integer arithmetic. Relabelings of the corners then move bin
indices by exact integer maps, so the 2pi/3 rotation symmetry holds bin for
bin, and the reflection theta -> -pi/3 - theta does too when N = 6 (mod 12).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..models.coefficients import DISK_RADIUS
from ..models.errors import PreconditionError
from ..models.histogram import WeightedHistogram
from .energy_model import SQRT2, SQRT6, polar_arrays
from .word_enumerator import LevelBatch, ProgressCallback, WordEnumerator, WordMeasure

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12
MAX_WEIGHT_CLASSES = 256

# (index of the largest, index of the smallest) -> sector k, where sector k
# spans (-pi/6 + k pi/3, pi/6 + k pi/3).
_SECTOR = np.array(
    [
        [-1, 0, 5],
        [3, -1, 4],
        [2, 1, -1],
    ]
)
# (odd component, odd one is larger) -> axis k at angle -pi/6 + k pi/3.
_AXIS = np.array(
    [
        [3, 0],
        [1, 4],
        [5, 2],
    ]
)


@dataclass
class ThetaCounts:
    """Per-worker partial result on the global angle grid.

    When a batch has few distinct weights the words are counted per weight
    class in integers and only scaled when partials are merged, so bins that
    hold the same words up to relabeling get bit-identical masses.
    """

    symmetric: bool
    classes: Dict[float, np.ndarray] = field(default_factory=dict)  # weight -> integer counts
    mass: Optional[np.ndarray] = None  # float masses when there are too many weights


def global_bins_for(bins: int, range_: str) -> int:
    if bins < 1:
        raise PreconditionError(f"bins must be positive, got {bins}")
    if range_ == "full":
        return bins
    if range_ == "third":
        return 3 * bins
    raise PreconditionError(f"unknown range {range_!r}")


def theta_bin_indices(b: np.ndarray, global_bins: int) -> Tuple[np.ndarray, bool]:
    """Global bin index of the angle of every b-vector.

    Returns:
        (indices, symmetric) where ``symmetric`` tells whether sector-exact
        binning was used (N a multiple of 6)
    """
    n_bins = global_bins
    radius, theta, center = polar_arrays(b)
    if n_bins % 6 != 0:
        idx = np.floor((theta + math.pi) / (2.0 * math.pi) * n_bins).astype(np.int64)
        return np.clip(idx, 0, n_bins - 1), False

    sixth = n_bins // 6
    third = n_bins // 3
    first_axis = 5 * n_bins // 6  # twice the position of the axis at -pi/6

    ordered = -np.sort(-b, axis=1)
    hi, mid, lo = ordered[:, 0], ordered[:, 1], ordered[:, 2]
    tolerance = TIE_TOLERANCE * np.maximum(hi, 1e-300)
    tie_top = (hi - mid) <= tolerance
    tie_bottom = (mid - lo) <= tolerance

    # (largest, smallest, middle) lies in sector 0, i.e. angle in [-pi/6, pi/6]
    x = (hi - lo) / SQRT2
    y = (2.0 * mid - hi - lo) / SQRT6
    phi = np.arctan2(y, x) + math.pi / 6.0
    t = np.clip(phi / (math.pi / 3.0) * sixth, 0.0, float(sixth))

    imax = np.argmax(b, axis=1)
    imin = np.argmin(b, axis=1)
    sector = _SECTOR[imax, imin]
    sector = np.where(sector < 0, 0, sector)
    base = first_axis + sector * third
    base_next = base + third
    even = sector % 2 == 0
    if first_axis % 2 == 0:
        ft = np.floor(t).astype(np.int64)
        idx = np.where(even, base // 2 + ft, base_next // 2 - ft - 1)
    else:
        u = np.floor(t + 0.5).astype(np.int64)
        idx = np.where(even, (base - 1) // 2 + u, (base_next - 1) // 2 - u)

    center = center | (tie_top & tie_bottom)
    axis = (tie_top | tie_bottom) & ~center
    odd = np.where(tie_top, imin, imax)
    axis_k = _AXIS[odd, tie_bottom.astype(np.int64)]
    idx = np.where(axis, (first_axis + axis_k * third) // 2, idx)
    idx = np.where(center, n_bins // 2, idx)
    return idx % n_bins, True


def rotation_defect(mass: np.ndarray) -> float:
    """max_i |m_i - m_{i + N/3}| on a global grid with N divisible by 3."""
    shifted = np.roll(mass, -(mass.shape[0] // 3))
    return float(np.max(np.abs(mass - shifted)))


def reflection_defect(mass: np.ndarray) -> float:
    """max_i |m_i - m_j| where bin j is the image of bin i under theta -> -pi/3 - theta."""
    n_bins = mass.shape[0]
    mirror = (5 * n_bins // 6 - 1 - np.arange(n_bins)) % n_bins
    return float(np.max(np.abs(mass - mass[mirror])))


class HistogramService:
    """Builds P_m and Q_m from enumerated word batches."""

    def theta_counts(self, batch: LevelBatch, global_bins: int) -> ThetaCounts:
        idx, symmetric = theta_bin_indices(batch.b, global_bins)
        units, classes = np.unique(batch.weight, return_inverse=True)
        if len(units) > MAX_WEIGHT_CLASSES:
            mass = np.bincount(idx, weights=batch.weight, minlength=global_bins)
            return ThetaCounts(symmetric=symmetric, mass=mass)
        counts = np.bincount(
            classes.reshape(-1) * global_bins + idx, minlength=len(units) * global_bins
        ).reshape(len(units), global_bins)
        return ThetaCounts(
            symmetric=symmetric,
            classes={float(u): counts[k] for k, u in enumerate(units)},
        )

    @staticmethod
    def _merge_counts(partials: List[ThetaCounts], global_bins: int) -> np.ndarray:
        """Sum integer counts per weight class, then scale in ascending weight order."""
        counts: Dict[float, np.ndarray] = {}
        for part in partials:
            for unit, row in part.classes.items():
                if unit in counts:
                    counts[unit] = counts[unit] + row
                else:
                    counts[unit] = row.astype(np.int64)
        total = np.zeros(global_bins)
        for unit in sorted(counts):
            total += unit * counts[unit]
        for part in partials:
            if part.mass is not None:
                total += part.mass
        return total

    def _finish_theta(
        self, partials: List[ThetaCounts], bins: int, range_: str
    ) -> WeightedHistogram:
        global_bins = global_bins_for(bins, range_)
        total = self._merge_counts(partials, global_bins)
        symmetric = partials[0].symmetric
        if not symmetric:
            logger.warning(
                "%d global bins is not a multiple of 6; symmetry checks skipped",
                global_bins,
            )
        rotation = rotation_defect(total) if symmetric else None
        reflection = reflection_defect(total) if symmetric else None
        if range_ == "full":
            lo, hi, mass = -math.pi, math.pi, total
        else:
            # fold the other two thirds onto [-pi/3, pi/3) by the 2pi/3 rotation
            lo, hi = -math.pi / 3.0, math.pi / 3.0
            mass = total[bins:2 * bins] + total[2 * bins:] + total[:bins]
        return WeightedHistogram(
            lo=lo,
            hi=hi,
            mass=mass,
            kind="theta",
            symmetric_binning=symmetric,
            rotation_defect=rotation,
            reflection_defect=reflection,
        )

    def histogram_theta(
        self, batches: Iterable[LevelBatch], bins: int, range_: str = "full"
    ) -> WeightedHistogram:
        """P_m from word batches.

        Args:
            batches: Batches of words with their weights
            bins: Bins over the requested range; the global grid has ``bins``
                bins for "full" and ``3 * bins`` for "third" ([-pi/3, pi/3])
            range_: "full" or "third"; "third" folds the whole circle onto
                [-pi/3, pi/3] by the 2pi/3 rotation, so the bins still hold
                all of the mass

        Returns:
            WeightedHistogram with rotation/reflection defects of the global grid
        """
        global_bins = global_bins_for(bins, range_)
        partials = [self.theta_counts(batch, global_bins) for batch in batches]
        if not partials:
            raise PreconditionError("no word batches to bin")
        return self._finish_theta(partials, bins, range_)

    def enumerate_theta(
        self,
        enumerator: WordEnumerator,
        depth: int,
        measure: WordMeasure,
        bins: int,
        range_: str = "full",
        progress_callback: Optional[ProgressCallback] = None,
    ) -> WeightedHistogram:
        """P_m with one private histogram per enumeration partition."""
        global_bins = global_bins_for(bins, range_)
        partials = enumerator.map_partitions(
            depth, measure, lambda batch: self.theta_counts(batch, global_bins), progress_callback
        )
        return self._finish_theta(partials, bins, range_)

    def radius_counts(self, batch: LevelBatch, bins: int) -> Tuple[np.ndarray, float]:
        radius, _, _ = polar_arrays(batch.b)
        width = DISK_RADIUS / bins
        idx = np.floor(radius / width).astype(np.int64)
        idx = np.where(radius == DISK_RADIUS, bins - 1, idx)
        inside = (radius >= 0) & (idx < bins)
        mass = np.bincount(idx[inside], weights=batch.weight[inside], minlength=bins)
        return mass, float(batch.weight[~inside].sum())

    def _finish_radius(self, partials: List[Tuple[np.ndarray, float]]) -> WeightedHistogram:
        mass = partials[0][0].copy()
        outside = partials[0][1]
        for part_mass, part_outside in partials[1:]:
            mass += part_mass
            outside += part_outside
        if outside > 0:
            logger.warning("radius histogram has %.3g mass outside [0, 1/sqrt(6)]", outside)
        return WeightedHistogram(
            lo=0.0, hi=DISK_RADIUS, mass=mass, out_of_range_mass=outside, kind="radius"
        )

    def histogram_radius(self, batches: Iterable[LevelBatch], bins: int) -> WeightedHistogram:
        """Q_m on [0, 1/sqrt(6)]."""
        if bins < 1:
            raise PreconditionError(f"bins must be positive, got {bins}")
        partials = [self.radius_counts(batch, bins) for batch in batches]
        if not partials:
            raise PreconditionError("no word batches to bin")
        return self._finish_radius(partials)

    def enumerate_radius(
        self,
        enumerator: WordEnumerator,
        depth: int,
        measure: WordMeasure,
        bins: int,
        progress_callback: Optional[ProgressCallback] = None,
    ) -> WeightedHistogram:
        if bins < 1:
            raise PreconditionError(f"bins must be positive, got {bins}")
        partials = enumerator.map_partitions(
            depth, measure, lambda batch: self.radius_counts(batch, bins), progress_callback
        )
        return self._finish_radius(partials)

    @staticmethod
    def mean_radius(batches: Iterable[LevelBatch]) -> float:
        """Weighted mean of r(b) over the batches."""
        total = 0.0
        weight = 0.0
        for batch in batches:
            radius, _, _ = polar_arrays(batch.b)
            total += float(np.dot(radius, batch.weight))
            weight += float(batch.weight.sum())
        return total / weight if weight else 0.0

    @staticmethod
    def total_variation(first: WeightedHistogram, second: WeightedHistogram) -> float:
        """Total-variation distance between two histograms on the same grid."""
        if first.bins != second.bins or first.lo != second.lo or first.hi != second.hi:
            raise PreconditionError("histograms must share the same bins")
        inside = float(np.abs(first.mass - second.mass).sum())
        outside = abs(first.out_of_range_mass - second.out_of_range_mass)
        return 0.5 * (inside + outside)
