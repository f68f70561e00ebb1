"""Closed-form kernels for batches of 2x2 matrices.

All functions accept a single matrix of shape (2, 2) or a stack of shape
(n, 2, 2) and return scalars or arrays of shape (n,) accordingly.
"""

import numpy as np


def det2(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def frobenius_sq(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    return np.einsum("...ij,...ij->...", m, m)


def largest_singular_value(m: np.ndarray) -> np.ndarray:
    """Operator norm of 2x2 matrices without an iterative SVD.

    With s = |M|_F^2 and d = det M, the squared singular values are the roots
    of x^2 - s x + d^2, so sigma_1^2 = (s + sqrt(s^2 - 4 d^2)) / 2.
    """
    s = frobenius_sq(m)
    d = det2(m)
    disc = np.maximum(s * s - 4.0 * d * d, 0.0)
    return np.sqrt((s + np.sqrt(disc)) / 2.0)


def det_ratio(m: np.ndarray) -> np.ndarray:
    """det(M)^2 / |M|_op^4, which lies in [0, 1] and is scale invariant."""
    s = frobenius_sq(m)
    d = det2(m)
    disc = np.maximum(s * s - 4.0 * d * d, 0.0)
    sigma1_sq = (s + np.sqrt(disc)) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(sigma1_sq > 0, (d * d) / (sigma1_sq * sigma1_sq), 0.0)
    return ratio


def angular_distance(y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
    """sqrt(1 - cos^2) of the angle between 2-vectors, as |y1 x y2| / (|y1||y2|)."""
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    cross = np.abs(y1[..., 0] * y2[..., 1] - y1[..., 1] * y2[..., 0])
    n1 = np.sqrt(np.einsum("...i,...i->...", y1, y1))
    n2 = np.sqrt(np.einsum("...i,...i->...", y2, y2))
    return np.minimum(cross / (n1 * n2), 1.0)
