"""Tests for output rendering."""

import json
from fractions import Fraction

import numpy as np

from src.utils.output import build_metadata, format_float, format_scalar, render_csv, render_json


def test_floats_round_trip_exactly():
    assert float(format_float(0.1)) == 0.1
    assert format_float(1 / 3) == "0.33333333333333331"


def test_format_scalar():
    assert format_scalar(Fraction(3, 5)) == "3/5"
    assert format_scalar(np.float64(0.5)) == 0.5
    assert format_scalar(True) is True


def test_csv_metadata_lines_precede_header():
    metadata = build_metadata("enumerate", {"seed": 1, "backend": "exact"}, words=3)
    text = render_csv(metadata, ["word", "weight"], [["1", 0.25], ["2", Fraction(1, 4)]])
    lines = text.splitlines()
    assert lines[0] == '# tool: "gasket-energy"'
    assert '# config.seed: 1' in lines
    assert "# words: 3" in lines
    assert lines[-3:] == ["word,weight", "1,0.25", "2,1/4"]


def test_json_handles_fractions_and_arrays():
    document = json.loads(render_json({"r": Fraction(3, 5), "b": np.array([0.5, 0.5])}))
    assert document == {"r": "3/5", "b": [0.5, 0.5]}
