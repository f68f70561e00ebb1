"""Tests for seeded Monte Carlo paths."""

import numpy as np
import pytest

from src.models.errors import PreconditionError
from src.models.word import Word
from src.services.montecarlo import MonteCarloService, named_generator, stream_id, substream
from src.services.word_enumerator import WordMeasure


def test_same_seed_same_paths(model2):
    service = MonteCarloService(model2, workers=2)
    first = service.run(100, 20, 7, WordMeasure.uniform())
    second = service.run(100, 20, 7, WordMeasure.uniform())
    assert np.array_equal(first.symbols, second.symbols)
    assert np.array_equal(first.sum_squares, second.sum_squares)


def test_paths_independent_of_worker_count(model2):
    sequential = MonteCarloService(model2, workers=1).run(130, 15, 3, WordMeasure.nu())
    parallel = MonteCarloService(model2, workers=4).run(130, 15, 3, WordMeasure.nu())
    assert np.array_equal(sequential.symbols, parallel.symbols)
    assert np.array_equal(sequential.det_ratio, parallel.det_ratio)


def test_different_seeds_differ(model2):
    service = MonteCarloService(model2, workers=1)
    a = service.run(20, 10, 1, WordMeasure.uniform())
    b = service.run(20, 10, 2, WordMeasure.uniform())
    assert not np.array_equal(a.symbols, b.symbols)


def test_initial_values(model2):
    result = MonteCarloService(model2).run(10, 5, 0, WordMeasure.uniform())
    assert result.samples == 10
    assert result.length == 5
    np.testing.assert_allclose(result.sum_squares[:, 0], 1 / 3, atol=1e-12)
    np.testing.assert_allclose(result.det_ratio[:, 0], 1.0, atol=1e-12)
    np.testing.assert_allclose(result.density_det[:, 0], 0.25, atol=1e-12)
    assert result.quantile_rows()[0] == pytest.approx((0, 1 / 6, 1 / 6, 1 / 6))
    assert len(result.quantile_rows()) == 6


@pytest.mark.parametrize("measure", [WordMeasure.uniform(), WordMeasure.nu()], ids=["uniform", "nu"])
def test_trajectories_match_direct_evaluation(model2, measure):
    result = MonteCarloService(model2, workers=1).run(4, 20, 11, measure)
    for sample in range(4):
        symbols = tuple(int(s) for s in result.symbols[sample])
        for n in (1, 5, 12, 20):
            w = Word(symbols[:n])
            assert result.sum_squares[sample, n] == pytest.approx(
                model2.b_coeffs(w).sum_squares(), abs=1e-12
            )
        # determinants of the unnormalized product lose precision on long words
        for n in (1, 3, 5):
            w = Word(symbols[:n])
            assert result.det_ratio[sample, n] == pytest.approx(
                model2.tilde_matrix(w).det_ratio, rel=1e-6
            )
            density = model2.energy_density_matrix(w)
            assert result.density_det[sample, n] == pytest.approx(
                float(np.linalg.det(density)), rel=1e-6, abs=1e-300
            )


def test_product_measure_respects_probabilities(model2):
    measure = WordMeasure.product((0.8, 0.1, 0.1))
    result = MonteCarloService(model2).run(200, 20, 5, measure)
    share = float(np.mean(result.symbols == 1))
    assert 0.75 < share < 0.85


@pytest.mark.parametrize("measure", [WordMeasure.uniform(), WordMeasure.nu()], ids=["uniform", "nu"])
def test_sum_of_squares_approaches_one_half(model2, measure):
    result = MonteCarloService(model2).run(200, 50, 0, measure)
    deviation = result.deviation()
    assert np.median(deviation[:, 50]) < 0.1 * np.median(deviation[:, 10])


def test_progress_counts_chunks(model2):
    calls = []
    MonteCarloService(model2, workers=2, chunk_size=16).run(
        40, 5, 0, WordMeasure.uniform(), progress_callback=lambda done, total: calls.append((done, total))
    )
    assert calls[-1] == (3, 3)
    assert len(calls) == 3


def test_invalid_sizes(model2):
    with pytest.raises(PreconditionError):
        MonteCarloService(model2).run(0, 5, 0, WordMeasure.uniform())


def test_streams_are_named_and_stable():
    assert stream_id("detratio") == stream_id("detratio")
    assert stream_id("detratio") != stream_id("rank")
    assert substream(1, "x", 3).random() == substream(1, "x", 3).random()
    assert substream(1, "x", 3).random() != substream(1, "x", 4).random()
    assert named_generator(0, "jjj").integers(1 << 30) == named_generator(0, "jjj").integers(1 << 30)
