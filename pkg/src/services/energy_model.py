"""Energy measures of harmonic functions and the coefficients a_j, b_j.

Every quantity here is evaluated in the mean-zero plane l~(V0). With Q the
3x2 matrix whose columns are a1 and a2, the restriction B_w = tQ A_w Q is
multiplicative (B_ws = B_s B_w) because A_s maps constants to constants, and
D only sees the mean-zero part of a vector. Working with 2x2 matrices avoids
subtracting the dominant constant mode of A_w at large depth.
"""

import logging
import math
from typing import Sequence, Tuple

import numpy as np

from ..models.coefficients import (
    CENTER_RADIUS,
    BVector,
    PolarPoint,
    TildeOperator,
    WordCoefficients,
)
from ..models.errors import DomainError
from ..models.harmonic_structure import HarmonicStructure
from ..models.word import Word
from ..utils import small_matrix

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
SQRT6 = math.sqrt(6.0)

# Rows are a1 and a2, an orthonormal basis of the mean-zero plane.
TILDE_BASIS = np.array(
    [
        [1.0 / SQRT2, -1.0 / SQRT2, 0.0],
        [-1.0 / SQRT6, -1.0 / SQRT6, 2.0 / SQRT6],
    ]
)
CENTER = np.full(3, 1.0 / 3.0)
CORNER_SYMBOLS = (1, 2, 3)


class EnergyModel:
    """Float evaluation of nu_f(K_w), a_j^(w), b_j^(w) and related quantities.

    The harmonic frame is x_k = a_k / (2 sqrt(gamma)), optionally rotated by
    ``frame_angle``; it satisfies (-D x_i, x_j) = delta_ij / 4 because -D acts
    as gamma times the identity on mean-zero vectors.
    """

    def __init__(self, hs: HarmonicStructure, frame_angle: float = 0.0):
        self.hs = hs
        self.structure = hs.structure
        self.num_symbols = hs.structure.num_cells
        self.r = float(hs.r)
        self.gamma = float(hs.gamma)
        self.frame_angle = frame_angle

        self.d = hs.d_array()
        self.a_maps = hs.a_array()
        self.u = hs.u_array()  # rows u_j
        self.v = hs.v_array()  # rows v_j
        self.projector = np.eye(3) - np.ones((3, 3)) / 3.0
        self.q = TILDE_BASIS.T  # (3, 2)

        self.b_maps = np.einsum("ki,skl,lj->sij", self.q, self.a_maps, self.q)
        self.d_tilde = self.q.T @ self.d @ self.q
        self.neg_d_tilde = -self.d_tilde
        c, s = math.cos(frame_angle), math.sin(frame_angle)
        rotation = np.array([[c, -s], [s, c]])
        self.frame_tilde = rotation / (2.0 * math.sqrt(self.gamma))  # columns x~_k
        self.frame = self.q @ self.frame_tilde  # columns x_k in l(V0)
        self.u_tilde = self.u @ self.q  # rows tQ u_j

    @classmethod
    def from_structure(cls, hs: HarmonicStructure, frame_angle: float = 0.0) -> "EnergyModel":
        return cls(hs, frame_angle=frame_angle)

    def rotated(self, angle: float) -> "EnergyModel":
        """Same structure with the frame rotated by ``angle`` (radians)."""
        return EnergyModel(self.hs, frame_angle=self.frame_angle + angle)

    # ------------------------------------------------------------------
    # Words and matrices
    # ------------------------------------------------------------------

    def _symbols(self, w: Word) -> Tuple[int, ...]:
        w.validate(self.num_symbols)
        return w.zero_based()

    def _corner(self, j: int) -> int:
        if j not in CORNER_SYMBOLS:
            raise DomainError(f"corner symbol must be one of 1, 2, 3, got {j}")
        return j - 1

    def word_matrix(self, w: Word) -> np.ndarray:
        """A_w = A_{w_m} ... A_{w_1}; the identity for the empty word."""
        a = np.eye(3)
        for s in self._symbols(w):
            a = self.a_maps[s] @ a
        return a

    def extend_matrix(self, a_w: np.ndarray, symbol: int) -> np.ndarray:
        """A_ws = A_s A_w for a 1-based symbol."""
        if not 1 <= symbol <= self.num_symbols:
            raise DomainError(f"symbol {symbol} out of range 1..{self.num_symbols}")
        return self.a_maps[symbol - 1] @ a_w

    def tilde_array(self, w: Word) -> np.ndarray:
        b = np.eye(2)
        for s in self._symbols(w):
            b = self.b_maps[s] @ b
        return b

    def tilde_matrix(self, w: Word) -> TildeOperator:
        """B_w with its determinant, operator norm and det_ratio."""
        b = self.tilde_array(w)
        return TildeOperator(
            matrix=((float(b[0, 0]), float(b[0, 1])), (float(b[1, 0]), float(b[1, 1]))),
            det=float(small_matrix.det2(b)),
            norm=float(small_matrix.largest_singular_value(b)),
            det_ratio=float(small_matrix.det_ratio(b)),
        )

    def _tilde_vector(self, f: Sequence[float]) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (3,):
            raise DomainError(f"boundary vectors have three entries, got shape {f.shape}")
        return self.q.T @ f

    # ------------------------------------------------------------------
    # Energy measures
    # ------------------------------------------------------------------

    def cell_energy(self, f: Sequence[float], w: Word) -> float:
        """nu_f(K_w) = -(2 / r^|w|) t(A_w f) D (A_w f)."""
        y = self.tilde_array(w) @ self._tilde_vector(f)
        return float((2.0 / self.r ** len(w)) * (y @ self.neg_d_tilde @ y))

    def bilinear_cell_energy(self, f: Sequence[float], g: Sequence[float], w: Word) -> float:
        """-(2 / r^|w|) t(A_w f) D (A_w g), evaluated directly."""
        b = self.tilde_array(w)
        yf = b @ self._tilde_vector(f)
        yg = b @ self._tilde_vector(g)
        return float((2.0 / self.r ** len(w)) * (yf @ self.neg_d_tilde @ yg))

    def mutual_cell_energy(self, f: Sequence[float], g: Sequence[float], w: Word) -> float:
        """nu_{f,g}(K_w) by polarization."""
        f = np.asarray(f, dtype=float)
        g = np.asarray(g, dtype=float)
        return 0.5 * (
            self.cell_energy(f + g, w) - self.cell_energy(f, w) - self.cell_energy(g, w)
        )

    def nu_mass(self, w: Word) -> float:
        """nu(K_w) = sum_k nu_{x_k}(K_w)."""
        b = self.tilde_array(w)
        return float(self.batch_nu(b[None], len(w))[0])

    def frame_gram(self) -> np.ndarray:
        """(-D x_i, x_j); equals I / 4 for a normalized frame."""
        return self.frame.T @ (-self.d) @ self.frame

    def energy_density_matrix(self, w: Word) -> np.ndarray:
        """nu_{x_i,x_j}(K_w) / nu(K_w); symmetric PSD with trace 1."""
        m = self.tilde_array(w) @ self.frame_tilde
        gram = m.T @ self.neg_d_tilde @ m
        return gram / np.trace(gram)

    # ------------------------------------------------------------------
    # Coefficients
    # ------------------------------------------------------------------

    def z_coordinates(self, w: Word) -> np.ndarray:
        """Rows are z_j = tA_w u_j in frame coordinates ((z_j, x_1), (z_j, x_2)).

        The frame inner product <z_i, z_j> is the dot product of rows i, j.
        """
        return self.u_tilde @ self.tilde_array(w) @ self.frame_tilde

    def z_vectors(self, w: Word) -> np.ndarray:
        """Rows are z_j = tA_w u_j in l(V0); they sum to zero."""
        return self.u @ self.word_matrix(w)

    def a_coeffs(self, w: Word) -> Tuple[float, float, float]:
        """a_j^(w) = sum_k (u_j, A_w x_k)^2 = |z_j|^2."""
        c = self.z_coordinates(w)
        a = (c * c).sum(axis=1)
        return (float(a[0]), float(a[1]), float(a[2]))

    def b_coeffs(self, w: Word) -> BVector:
        a = np.array(self.a_coeffs(w))
        b = a / a.sum()
        return BVector((float(b[0]), float(b[1]), float(b[2])))

    def coefficients(self, w: Word) -> WordCoefficients:
        a = self.a_coeffs(w)
        b = self.b_coeffs(w)
        return WordCoefficients(word=w, a=a, b=b, polar=polar(b))

    def limit_density(self, w: Word, j: int, f: Sequence[float]) -> float:
        """(u_j, A_w f)^2 / a_j^(w), the limit of nu_f / nu along w j^n."""
        k = self._corner(j)
        pairing = self.u_tilde[k] @ self.tilde_array(w) @ self._tilde_vector(f)
        return float(pairing * pairing / self.a_coeffs(w)[k])

    def density_ratio(self, w: Word, j: int, f: Sequence[float], n: int) -> float:
        """nu_f(K_{w j^n}) / nu(K_{w j^n}); the r^-m factors cancel."""
        self._corner(j)
        b = self.tilde_array(w.power(j, n))
        y = b @ self._tilde_vector(f)
        m = b @ self.frame_tilde
        total = np.trace(m.T @ self.neg_d_tilde @ m)
        return float((y @ self.neg_d_tilde @ y) / total)

    def sum_b_squared_formula(self, w: Word, k: int) -> float:
        """sum_j b_j^2 rebuilt from the z_j with S0' = S0 minus {k}.

        Uses (2 + (2 sum |z_i|^2 |z_j|^2 - (sum <z_i, z_j>)^2) / sum |z_j|^4)^-1
        with both inner sums over ordered pairs i != j in S0'.
        """
        kk = self._corner(k)
        c = self.z_coordinates(w)
        norms = (c * c).sum(axis=1)
        p, q = [i for i in range(3) if i != kk]
        pair_norms = 2.0 * norms[p] * norms[q]
        pair_inner = 2.0 * float(c[p] @ c[q])
        denominator = float((norms * norms).sum())
        return 1.0 / (2.0 + (2.0 * pair_norms - pair_inner * pair_inner) / denominator)

    # ------------------------------------------------------------------
    # Batched kernels used by the enumerator and Monte Carlo
    # ------------------------------------------------------------------

    def batch_a(self, tilde: np.ndarray) -> np.ndarray:
        """a_j for a stack of B_w, shape (n, 2, 2) -> (n, 3)."""
        c = np.einsum("jk,nkl,lm->njm", self.u_tilde, tilde, self.frame_tilde)
        return (c * c).sum(axis=2)

    def batch_b(self, tilde: np.ndarray) -> np.ndarray:
        a = self.batch_a(tilde)
        return a / a.sum(axis=1, keepdims=True)

    def batch_energy_trace(self, tilde: np.ndarray) -> np.ndarray:
        """tr(tM (-D~) M) with M = B_w X~; nu(K_w) without the 2 / r^m factor."""
        m = tilde @ self.frame_tilde
        return np.einsum("nij,ik,nkj->n", m, self.neg_d_tilde, m)

    def batch_nu(self, tilde: np.ndarray, depth: int) -> np.ndarray:
        return (2.0 / self.r ** depth) * self.batch_energy_trace(tilde)

    def batch_density_det(self, tilde: np.ndarray) -> np.ndarray:
        """Determinant of the energy density matrix for each B_w."""
        m = tilde @ self.frame_tilde
        gram = np.einsum("nji,jk,nkl->nil", m, self.neg_d_tilde, m)
        trace = gram[:, 0, 0] + gram[:, 1, 1]
        return small_matrix.det2(gram) / (trace * trace)


def polar(b: BVector) -> PolarPoint:
    """Polar coordinates of b around c = (1/3, 1/3, 1/3) in the a1/a2 plane."""
    radius, theta, center = polar_arrays(np.array([b.b]))
    return PolarPoint(radius=float(radius[0]), theta=float(theta[0]), center=bool(center[0]))


def polar_arrays(b: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized polar coordinates for an (n, 3) array of b-vectors.

    Returns:
        (radius, theta, center) with theta in (-pi, pi] and 0 at the center
    """
    diff = b - CENTER
    radius = np.sqrt((diff * diff).sum(axis=1))
    x = diff @ TILDE_BASIS[0]
    y = diff @ TILDE_BASIS[1]
    theta = np.arctan2(y, x)
    theta = np.where(theta <= -math.pi, math.pi, theta)
    center = radius < CENTER_RADIUS
    theta = np.where(center, 0.0, theta)
    return radius, theta, center


def angular_distance(y1: Sequence[float], y2: Sequence[float]) -> float:
    """sqrt(1 - cos^2) of the angle between two nonzero 2-vectors.

    Raises:
        DomainError: if either vector is zero
    """
    a = np.asarray(y1, dtype=float)
    b = np.asarray(y2, dtype=float)
    if not np.any(a) or not np.any(b):
        raise DomainError("angular distance is undefined for a zero vector")
    return float(small_matrix.angular_distance(a, b))


def random_word(rng: np.random.Generator, num_symbols: int, max_length: int,
                min_length: int = 0) -> Word:
    length = int(rng.integers(min_length, max_length + 1))
    return Word(tuple(int(s) + 1 for s in rng.integers(0, num_symbols, size=length)))


def model_for_level(level: int, backend: str = "exact", exact_cap: int = 20,
                    certify_cap: int = 50) -> EnergyModel:
    """Convenience: build SG_l and wrap it in an EnergyModel."""
    from .structure_builder import StructureBuilder

    hs = StructureBuilder(exact_cap, certify_cap).build_harmonic_structure(level, backend)
    return EnergyModel.from_structure(hs)
