"""Tests for exact linear algebra helpers."""

from fractions import Fraction

import pytest

from src.utils import rational_linalg as rl


def test_determinant_and_rank():
    d = rl.to_matrix([[-2, 1, 1], [1, -2, 1], [1, 1, -2]])
    assert rl.determinant(d) == 0
    assert rl.rank(d) == 2
    assert rl.determinant(rl.identity(3)) == 1


def test_nullspace_of_laplacian_is_constants():
    d = rl.to_matrix([[-2, 1, 1], [1, -2, 1], [1, 1, -2]])
    basis = rl.nullspace(d)
    assert len(basis) == 1
    v = basis[0]
    assert v[0] == v[1] == v[2] != 0


def test_solve_fraction_free_matches_hand_solution():
    # [[-4, 1], [1, -4]] x = b
    coefficients = [{0: -4, 1: 1}, {0: 1, 1: -4}]
    solutions = rl.solve_fraction_free(coefficients, [[-1, 0], [0, -1]])
    assert solutions[0] == (Fraction(4, 15), Fraction(1, 15))
    assert solutions[1] == (Fraction(1, 15), Fraction(4, 15))


def test_solve_fraction_free_sparse_rows_without_diagonal_fill():
    # a zero entry below the pivot must not be touched
    coefficients = [{0: 2, 1: 1}, {1: 3}, {0: 1, 2: 5}]
    (x,) = rl.solve_fraction_free(coefficients, [[3, 3, 6]])
    assert x == (Fraction(1), Fraction(1), Fraction(1))


def test_solve_fraction_free_zero_pivot():
    with pytest.raises(ZeroDivisionError):
        rl.solve_fraction_free([{1: 1}, {0: 1}], [[1, 1]])


def test_format_fraction():
    assert rl.format_fraction(Fraction(3, 5)) == "3/5"
    assert rl.format_fraction(Fraction(2)) == "2/1"
    assert rl.format_fraction(Fraction(-1, 3)) == "-1/3"


def test_matmul_and_transpose():
    a = rl.to_matrix([[1, 2], [3, 4]])
    assert rl.matmul(a, rl.identity(2)) == a
    assert rl.transpose(a) == ((1, 3), (2, 4))
    assert rl.trace(a) == 5
