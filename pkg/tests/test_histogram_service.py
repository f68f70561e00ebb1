"""Tests for the angle and radius histograms."""

import math

import numpy as np
import pytest

from src.models.coefficients import DISK_RADIUS
from src.models.errors import PreconditionError
from src.services.histogram_service import (
    HistogramService,
    global_bins_for,
    reflection_defect,
    rotation_defect,
    theta_bin_indices,
)
from src.services.word_enumerator import WordEnumerator, WordMeasure

N = 6006  # multiple of 6 and 6 mod 12: rotation and reflection are bin-exact


@pytest.fixture
def service():
    return HistogramService()


@pytest.fixture
def enumerator2(model2):
    return WordEnumerator(model2, workers=2)


def random_b(count, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.random((count, 3)) + 1e-3
    return a / a.sum(axis=1, keepdims=True)


def test_cyclic_relabeling_shifts_by_a_third():
    b = random_b(5000)
    idx, symmetric = theta_bin_indices(b, N)
    rolled, _ = theta_bin_indices(b[:, [2, 0, 1]], N)
    assert symmetric
    shifts = np.unique((rolled - idx) % N)
    assert len(shifts) == 1
    assert shifts[0] in (N // 3, 2 * N // 3)


def test_swap_of_two_corners_mirrors_bins():
    b = random_b(5000, seed=1)
    idx, _ = theta_bin_indices(b, N)
    swapped, _ = theta_bin_indices(b[:, [0, 2, 1]], N)
    assert np.array_equal(swapped, (5 * N // 6 - 1 - idx) % N)


def test_plain_binning_when_not_multiple_of_six():
    b = random_b(10)
    idx, symmetric = theta_bin_indices(b, 1000)
    assert not symmetric
    assert np.all((idx >= 0) & (idx < 1000))


def test_depth_one_spikes(service, enumerator2):
    hist = service.enumerate_theta(enumerator2, 1, WordMeasure.uniform(), N)
    occupied = np.nonzero(hist.mass)[0]
    assert len(occupied) == 3
    assert hist.mass[occupied] == pytest.approx([1 / 3] * 3)
    edges = hist.edges()
    for angle in (-math.pi / 6, -math.pi / 6 + 2 * math.pi / 3, -math.pi / 6 - 2 * math.pi / 3):
        assert any(edges[i] <= angle <= edges[i + 1] for i in occupied)


def test_uniform_histogram_is_symmetric(service, enumerator2):
    hist = service.enumerate_theta(enumerator2, 7, WordMeasure.uniform(), N)
    assert hist.symmetric_binning
    assert hist.rotation_defect == 0.0
    assert hist.reflection_defect == 0.0
    assert hist.total_mass == pytest.approx(1.0, abs=1e-9)
    assert hist.out_of_range_mass == 0.0


def test_nu_histogram_is_symmetric_up_to_rounding(service, enumerator2):
    hist = service.enumerate_theta(enumerator2, 7, WordMeasure.nu(), N)
    assert hist.rotation_defect < 1e-12
    assert hist.reflection_defect < 1e-12


def test_third_range_folds_the_circle(service, enumerator2):
    hist = service.enumerate_theta(enumerator2, 1, WordMeasure.uniform(), 2002, "third")
    assert hist.bins == 2002
    assert hist.lo == pytest.approx(-math.pi / 3)
    assert hist.hi == pytest.approx(math.pi / 3)
    # the three depth-one spikes are rotations of each other
    occupied = np.nonzero(hist.mass)[0]
    assert len(occupied) == 1
    assert hist.mass[occupied[0]] == pytest.approx(1.0)
    assert hist.out_of_range_mass == 0.0


def test_third_range_keeps_all_mass(service, enumerator2):
    for measure in (WordMeasure.uniform(), WordMeasure.nu()):
        hist = service.enumerate_theta(enumerator2, 6, measure, 2002, "third")
        assert float(hist.mass.sum()) == pytest.approx(1.0, abs=1e-12)
        assert hist.out_of_range_mass == 0.0
        assert hist.total_mass == pytest.approx(1.0, abs=1e-12)


def test_product_measure_reflection_is_exact(service, enumerator2):
    measure = WordMeasure.product((0.5, 0.25, 0.25))
    hist = service.enumerate_theta(enumerator2, 7, measure, N)
    assert hist.reflection_defect == 0.0
    assert hist.rotation_defect > 0


@pytest.mark.slow
def test_uniform_rotation_exact_at_depth_13(service, enumerator2):
    hist = service.enumerate_theta(enumerator2, 13, WordMeasure.uniform(), 6000)
    assert hist.rotation_defect == 0.0


def test_non_multiple_of_six_warns(service, enumerator2, caplog):
    with caplog.at_level("WARNING"):
        hist = service.enumerate_theta(enumerator2, 2, WordMeasure.uniform(), 1000)
    assert not hist.symmetric_binning
    assert hist.rotation_defect is None
    assert "not a multiple of 6" in caplog.text


def test_batch_and_partitioned_histograms_agree(service, enumerator2):
    batch = enumerator2.enumerate(5, WordMeasure.nu())
    direct = service.histogram_theta([batch], N)
    partitioned = service.enumerate_theta(enumerator2, 5, WordMeasure.nu(), N)
    np.testing.assert_allclose(direct.mass, partitioned.mass, rtol=0, atol=1e-15)


def test_radius_histogram(service, enumerator2):
    root = service.enumerate_radius(enumerator2, 0, WordMeasure.uniform(), 100)
    assert root.mass[0] == 1.0
    first = service.enumerate_radius(enumerator2, 1, WordMeasure.uniform(), 101)
    expected_bin = 80  # radius sqrt(8/75) = 0.8 / sqrt(6)
    assert first.mass[expected_bin] == pytest.approx(1.0)
    assert first.hi == pytest.approx(DISK_RADIUS)
    assert first.out_of_range_mass == 0.0


def test_mean_radius_grows_with_depth(service, enumerator2):
    levels = enumerator2.levels(10, WordMeasure.uniform())
    shallow = service.mean_radius([levels[5]])
    deep = service.mean_radius([levels[10]])
    assert shallow < deep < DISK_RADIUS


def test_total_variation(service, enumerator2):
    uniform = service.enumerate_theta(enumerator2, 6, WordMeasure.uniform(), N)
    nu = service.enumerate_theta(enumerator2, 6, WordMeasure.nu(), N)
    assert service.total_variation(uniform, uniform) == 0.0
    assert 0.0 < service.total_variation(uniform, nu) <= 1.0
    coarse = service.enumerate_theta(enumerator2, 1, WordMeasure.uniform(), 600)
    with pytest.raises(PreconditionError):
        service.total_variation(uniform, coarse)


def test_defects_detect_asymmetry():
    mass = np.zeros(12)
    mass[0] = 1.0
    assert rotation_defect(mass) == 1.0
    assert reflection_defect(mass) == 1.0


def test_bins_must_be_positive():
    with pytest.raises(PreconditionError):
        global_bins_for(0, "full")
    assert global_bins_for(2000, "third") == 6000
