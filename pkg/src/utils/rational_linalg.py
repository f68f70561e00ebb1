"""Exact linear algebra over the rationals.

Matrices are tuples of row tuples holding ``Fraction`` (or ``int``) entries.
The interior solve uses fraction-free elimination on sparse integer rows:
row updates are ``row_i = a_kk * row_i - a_ik * row_k`` followed by division by
the row gcd, so intermediate values stay integers until back-substitution.
"""

from fractions import Fraction
from math import gcd
from typing import Dict, List, Sequence, Tuple

Matrix = Tuple[Tuple[Fraction, ...], ...]
Vector = Tuple[Fraction, ...]


def to_matrix(rows: Sequence[Sequence]) -> Matrix:
    """Convert nested sequences to an immutable Fraction matrix."""
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(
        tuple(Fraction(1) if i == j else Fraction(0) for j in range(n))
        for i in range(n)
    )


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Product of two rational matrices."""
    bt = transpose(b)
    return tuple(
        tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt)
        for row in a
    )


def matvec(a: Matrix, x: Sequence[Fraction]) -> Vector:
    return tuple(sum((r * v for r, v in zip(row, x)), Fraction(0)) for row in a)


def dot(x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(x, y)), Fraction(0))


def scale(a: Matrix, c: Fraction) -> Matrix:
    return tuple(tuple(c * x for x in row) for row in a)


def add(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def trace(a: Matrix) -> Fraction:
    return sum((a[i][i] for i in range(len(a))), Fraction(0))


def determinant(a: Matrix) -> Fraction:
    """Determinant by Gaussian elimination with exact pivoting."""
    m = [list(row) for row in a]
    n = len(m)
    det = Fraction(1)
    for k in range(n):
        pivot = next((i for i in range(k, n) if m[i][k] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != k:
            m[k], m[pivot] = m[pivot], m[k]
            det = -det
        det *= m[k][k]
        for i in range(k + 1, n):
            if m[i][k] == 0:
                continue
            factor = m[i][k] / m[k][k]
            for j in range(k, n):
                m[i][j] -= factor * m[k][j]
    return det


def row_echelon(a: Matrix) -> List[List[Fraction]]:
    """Reduced row echelon form (used for rank and nullspace)."""
    m = [list(row) for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    lead = 0
    for r in range(rows):
        if lead >= cols:
            break
        i = r
        while m[i][lead] == 0:
            i += 1
            if i == rows:
                i = r
                lead += 1
                if lead == cols:
                    return m
        m[i], m[r] = m[r], m[i]
        pivot = m[r][lead]
        m[r] = [x / pivot for x in m[r]]
        for i in range(rows):
            if i != r and m[i][lead] != 0:
                factor = m[i][lead]
                m[i] = [x - factor * y for x, y in zip(m[i], m[r])]
        lead += 1
    return m


def rank(a: Matrix) -> int:
    return sum(1 for row in row_echelon(a) if any(x != 0 for x in row))


def nullspace(a: Matrix) -> List[Vector]:
    """Basis of the right nullspace of ``a``."""
    rref = row_echelon(a)
    cols = len(a[0])
    pivots = {}
    for r, row in enumerate(rref):
        for c, x in enumerate(row):
            if x != 0:
                pivots[c] = r
                break
    basis = []
    for free in (c for c in range(cols) if c not in pivots):
        v = [Fraction(0)] * cols
        v[free] = Fraction(1)
        for c, r in pivots.items():
            v[c] = -rref[r][free]
        basis.append(tuple(v))
    return basis


def _reduce_row(row: Dict[int, int]) -> Dict[int, int]:
    g = 0
    for value in row.values():
        g = gcd(g, value)
        if g == 1:
            return row
    if g > 1:
        return {c: v // g for c, v in row.items()}
    return row


def solve_fraction_free(
    coefficients: Sequence[Dict[int, int]],
    right_hand_sides: Sequence[Sequence[int]],
) -> List[Vector]:
    """Solve ``M x = b`` exactly for several integer right-hand sides.

    Args:
        coefficients: Sparse integer rows of the square matrix ``M``
            (column index -> value). ``M`` must have nonzero leading principal
            minors, which holds for the negative definite interior block of a
            connected network Laplacian.
        right_hand_sides: Integer columns ``b``, each of length ``n``.

    Returns:
        One exact solution vector per right-hand side.

    Raises:
        ZeroDivisionError: if a zero pivot shows up (singular leading minor).
    """
    n = len(coefficients)
    k_rhs = len(right_hand_sides)
    # RHS columns are stored after the n matrix columns
    rows: List[Dict[int, int]] = []
    for i, row in enumerate(coefficients):
        augmented = {c: v for c, v in row.items() if v != 0}
        for r, rhs in enumerate(right_hand_sides):
            if rhs[i] != 0:
                augmented[n + r] = rhs[i]
        rows.append(augmented)

    # column index -> rows below the diagonal with a nonzero entry there
    occupancy: Dict[int, set] = {}
    for i, row in enumerate(rows):
        for c in row:
            if c < n:
                occupancy.setdefault(c, set()).add(i)

    for k in range(n):
        pivot_row = rows[k]
        a_kk = pivot_row.get(k, 0)
        if a_kk == 0:
            raise ZeroDivisionError(f"zero pivot at interior index {k}")
        for i in sorted(occupancy.get(k, ())):
            if i <= k:
                continue
            row = rows[i]
            a_ik = row.get(k, 0)
            if a_ik == 0:
                continue
            updated = {c: a_kk * v for c, v in row.items()}
            for c, v in pivot_row.items():
                value = updated.get(c, 0) - a_ik * v
                if value:
                    updated[c] = value
                else:
                    updated.pop(c, None)
            updated.pop(k, None)
            for c in updated:
                if c < n and c not in row:
                    occupancy.setdefault(c, set()).add(i)
            rows[i] = _reduce_row(updated)

    solutions = []
    for r in range(k_rhs):
        x = [Fraction(0)] * n
        for k in range(n - 1, -1, -1):
            row = rows[k]
            acc = Fraction(row.get(n + r, 0))
            for c, v in row.items():
                if k < c < n:
                    acc -= v * x[c]
            x[k] = acc / row[k]
        solutions.append(tuple(x))
    return solutions


def format_fraction(x: Fraction) -> str:
    """Render a rational as ``"num/den"`` (denominator always present)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"
