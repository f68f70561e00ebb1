"""Tests for the value types."""

import json

import numpy as np
import pytest

from src.models.coefficients import BVector
from src.models.errors import DomainError
from src.models.histogram import WeightedHistogram
from src.models.report import VerificationReport, Witness
from src.models.word import Word


@pytest.mark.parametrize(
    "text, symbols",
    [("1,2,3", (1, 2, 3)), ("1.2.3", (1, 2, 3)), ("123", (1, 2, 3)), ("", ()), ("-", ()),
     ("10,2", (10, 2))],
)
def test_word_parse(text, symbols):
    assert Word.parse(text).symbols == symbols


def test_word_parse_rejects_bad_input():
    with pytest.raises(DomainError):
        Word.parse("1,x")
    with pytest.raises(DomainError):
        Word.parse("1,4", num_symbols=3)


def test_word_labels():
    assert Word((1, 2)).label() == "12"
    assert Word((10, 2)).label() == "10.2"
    assert str(Word.empty()) == "()"
    assert Word((2,)).power(1, 3) == Word((2, 1, 1, 1))


def test_labels_on_large_alphabets():
    # SG_5 has 15 symbols
    assert Word((11,)).label(15) == "11"
    assert Word((1, 1)).label(15) == "1.1"
    assert Word((1, 2)).label(3) == "12"
    assert Word.parse("12", 15) == Word((12,))
    assert Word.parse("1.2", 15) == Word((1, 2))
    assert Word.parse("12", 3) == Word((1, 2))
    for w in (Word((11,)), Word((1, 1)), Word((15, 3, 1))):
        assert Word.parse(w.label(15), 15) == w
    with pytest.raises(DomainError):
        Word.parse("16", 15)


def test_bvector_validation():
    assert BVector((0.6, 0.2, 0.2)).is_valid()
    assert BVector((0.6, 0.2, 0.2)).centered_sum_squares() == pytest.approx(8 / 75)
    with pytest.raises(DomainError):
        BVector((1.0, 0.0, 0.0)).validate()
    with pytest.raises(DomainError):
        BVector((0.5, 0.5, 0.1)).validate()


def test_histogram_rows_close_last_bin():
    h = WeightedHistogram(lo=0.0, hi=1.0, mass=np.array([0.25, 0.5, 0.25]))
    rows = h.rows()
    assert len(rows) == 3
    assert rows[0][0] == 0.0
    assert rows[-1][1] == 1.0
    assert h.total_mass == pytest.approx(1.0)
    assert h.mean() == pytest.approx(0.5)


def test_failing_report_carries_witness():
    report = VerificationReport(check="demo", parameters={"level": 2})
    assert report.passed
    report.fail(Witness(word="12", residual=0.5, detail={"j": 1}))
    data = report.to_dict()
    assert data["status"] == "fail"
    assert data["witness"] == {"word": "12", "residual": 0.5, "detail": {"j": 1}}
    assert data["runtime_s"] is None
    json.dumps(data)
