"""Tests for energy measures and the a/b coefficients."""

import math

import numpy as np
import pytest

from src.models.errors import DomainError
from src.models.word import Word
from src.services.energy_model import angular_distance, polar, random_word

F = (0.0, 1.0, 1.0)


def test_cell_energy_golden_values(model2):
    assert model2.cell_energy(F, Word.empty()) == pytest.approx(4.0, rel=1e-12)
    assert model2.cell_energy(F, Word((1,))) == pytest.approx(12 / 5, rel=1e-12)
    assert model2.cell_energy(F, Word((2,))) == pytest.approx(4 / 5, rel=1e-12)
    assert model2.cell_energy(F, Word((3,))) == pytest.approx(4 / 5, rel=1e-12)


def test_cell_energy_of_constants_vanishes(model2):
    assert model2.cell_energy((1.0, 1.0, 1.0), Word((1, 2, 3))) == pytest.approx(0.0, abs=1e-14)


def test_energy_is_additive_over_children(model3):
    f = (0.3, -1.2, 0.7)
    w = Word((4, 1, 6))
    children = sum(model3.cell_energy(f, w.append(s)) for s in range(1, 7))
    assert children == pytest.approx(model3.cell_energy(f, w), rel=1e-12)


def test_a_and_b_golden_values(model2):
    assert model2.a_coeffs(Word.empty()) == pytest.approx((0.5, 0.5, 0.5), abs=1e-12)
    assert model2.a_coeffs(Word((1,))) == pytest.approx((0.18, 0.06, 0.06), abs=1e-12)
    assert model2.b_coeffs(Word.empty()).b == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-12)
    assert model2.b_coeffs(Word((1,))).b == pytest.approx((0.6, 0.2, 0.2), abs=1e-12)


def test_polar_of_first_child(model2):
    p = polar(model2.b_coeffs(Word((1,))))
    assert p.radius ** 2 == pytest.approx(8 / 75, abs=1e-12)
    assert p.theta == pytest.approx(-math.pi / 6, abs=1e-12)
    assert not p.center


def test_polar_center_is_flagged(model2):
    p = polar(model2.b_coeffs(Word.empty()))
    assert p.center
    assert p.theta == 0.0


def test_nu_is_probability(model2):
    assert model2.nu_mass(Word.empty()) == pytest.approx(1.0, abs=1e-12)
    for s in (1, 2, 3):
        assert model2.nu_mass(Word((s,))) == pytest.approx(1 / 3, abs=1e-12)


def test_nu_ratio_spot_value(model2):
    ratio = model2.nu_mass(Word((1, 1))) / model2.nu_mass(Word((1,)))
    assert ratio == pytest.approx(41 / 75, abs=1e-10)


def test_limit_density_root(model2):
    assert model2.limit_density(Word.empty(), 1, F) == pytest.approx(8.0, rel=1e-12)


def test_density_ratio_converges_to_limit(model2):
    w = Word((2, 3, 1))
    f = (0.4, -0.9, 1.3)
    for j in (1, 2, 3):
        limit = model2.limit_density(w, j, f)
        assert model2.density_ratio(w, j, f, 30) == pytest.approx(limit, rel=1e-6, abs=1e-6)


def test_decomposition_identity(model3):
    w = Word((5, 2, 2, 6))
    f = (1.0, -0.5, 0.25)
    lhs = model3.cell_energy(f, w) / model3.nu_mass(w)
    b = model3.b_coeffs(w).b
    rhs = sum(b[j - 1] * model3.limit_density(w, j, f) for j in (1, 2, 3))
    assert lhs == pytest.approx(rhs, rel=1e-10)


@pytest.mark.parametrize("w", [Word.empty(), Word((1,)), Word((2, 3, 1, 1, 2)), Word((3,) * 9)])
def test_sum_b_squared_formula(model2, w):
    direct = model2.b_coeffs(w).sum_squares()
    for k in (1, 2, 3):
        assert model2.sum_b_squared_formula(w, k) == pytest.approx(direct, abs=1e-10)


def test_sum_b_squared_known_values(model2):
    assert model2.sum_b_squared_formula(Word.empty(), 1) == pytest.approx(1 / 3, abs=1e-12)
    assert model2.sum_b_squared_formula(Word((1,)), 2) == pytest.approx(11 / 25, abs=1e-12)


def test_b_along_constant_path_closed_form(model2):
    for n in range(1, 12):
        rho = (1 / 9) ** n
        b = model2.b_coeffs(Word((1,) * n)).b
        assert b[0] == pytest.approx(2 / (3 * (1 + rho)), abs=1e-12)
        assert b[1] == pytest.approx((1 + 3 * rho) / (6 * (1 + rho)), abs=1e-12)
        assert b[2] == pytest.approx(b[1], abs=1e-12)


def test_det_ratio_of_powers(model2):
    assert model2.tilde_matrix(Word.empty()).det_ratio == pytest.approx(1.0)
    for n in (1, 3, 6):
        assert model2.tilde_matrix(Word((1,) * n)).det_ratio == pytest.approx(
            (1 / 9) ** n, rel=1e-9
        )


def test_tilde_matrix_is_restriction(model3):
    w = Word((6, 2, 4))
    full = model3.q.T @ model3.word_matrix(w) @ model3.q
    np.testing.assert_allclose(model3.tilde_array(w), full, atol=1e-14)


def test_frame_is_normalized(model2, model3):
    for m in (model2, model3, model2.rotated(0.7)):
        np.testing.assert_allclose(m.frame_gram(), np.eye(2) / 4, atol=1e-12)


def test_frame_rotation_leaves_a_unchanged(model3):
    w = Word((3, 5, 1, 2))
    rotated = model3.rotated(1.234)
    assert rotated.a_coeffs(w) == pytest.approx(model3.a_coeffs(w), abs=1e-12)


def test_energy_density_matrix(model2):
    root = model2.energy_density_matrix(Word.empty())
    np.testing.assert_allclose(root, np.eye(2) / 2, atol=1e-12)
    m = model2.energy_density_matrix(Word((1, 2, 3, 3)))
    assert np.trace(m) == pytest.approx(1.0)
    assert np.all(np.linalg.eigvalsh(m) >= -1e-12)


def test_mutual_energy_polarization_and_cauchy_schwarz(model2):
    w = Word((2, 1, 3))
    f, g = (0.1, 0.7, -0.4), (1.0, -2.0, 0.5)
    mutual = model2.mutual_cell_energy(f, g, w)
    assert mutual == pytest.approx(model2.bilinear_cell_energy(f, g, w), rel=1e-10)
    assert mutual ** 2 <= model2.cell_energy(f, w) * model2.cell_energy(g, w) * (1 + 1e-12)


def test_z_vectors_sum_to_zero(model3):
    z = model3.z_vectors(Word((4, 4, 2)))
    np.testing.assert_allclose(z.sum(axis=0), 0.0, atol=1e-12)


def test_b_vectors_stay_in_disk(model3):
    rng = np.random.default_rng(3)
    for _ in range(50):
        w = random_word(rng, 6, 6)
        b = model3.b_coeffs(w)
        assert b.is_valid()
        assert b.centered_sum_squares() < 1 / 6


@pytest.mark.parametrize("w", [Word.empty(), Word((1,)), Word((2, 3, 1))])
def test_extend_matrix_appends_symbol(model2, w):
    a_w = model2.word_matrix(w)
    for s in (1, 2, 3):
        np.testing.assert_allclose(
            model2.extend_matrix(a_w, s), model2.word_matrix(w.append(s)), atol=1e-14
        )
    with pytest.raises(DomainError):
        model2.extend_matrix(a_w, 4)
    with pytest.raises(DomainError):
        model2.extend_matrix(a_w, 0)


def test_invalid_inputs(model2):
    with pytest.raises(DomainError):
        model2.b_coeffs(Word((4,)))
    with pytest.raises(DomainError):
        model2.limit_density(Word.empty(), 4, F)
    with pytest.raises(DomainError):
        model2.cell_energy((1.0, 2.0), Word.empty())


def test_angular_distance():
    assert angular_distance((1, 0), (0, 2)) == pytest.approx(1.0)
    assert angular_distance((1, 1), (-2, -2)) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        angular_distance((0, 0), (1, 0))


def test_random_word_lengths():
    rng = np.random.default_rng(0)
    words = [random_word(rng, 3, 5, min_length=2) for _ in range(100)]
    assert all(2 <= len(w) <= 5 for w in words)
    assert all(1 <= s <= 3 for w in words for s in w.symbols)
