"""Tests for layered run configuration."""

import json

import pytest

from src.models.errors import ConfigError
from src.models.run_config import RunConfig, parse_floats


def test_defaults():
    config = RunConfig.resolve({}, environ={})
    assert config.level == 2
    assert config.depth == 8
    assert config.effective_bins() == 6000
    assert config.threads is None


def test_layers_apply_in_order(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"seed": 1, "depth": 5, "max-leaves": 1000}))
    config = RunConfig.resolve(
        {"depth": 7, "bins": None}, str(path), environ={"GASKET_SEED": "4", "GASKET_THREADS": "3"}
    )
    assert config.seed == 4  # environment beats the file
    assert config.depth == 7  # flags beat the file
    assert config.max_leaves == 1000
    assert config.threads == 3
    assert config.bins is None


def test_flags_beat_environment():
    config = RunConfig.resolve({"seed": 9}, environ={"GASKET_SEED": "4"})
    assert config.seed == 9


@pytest.mark.parametrize(
    "overrides",
    [
        {"level": 1},
        {"depth": -1},
        {"bins": 0},
        {"range": "half"},
        {"measure": "gibbs"},
        {"backend": "symbolic"},
        {"format": "xml"},
        {"threads": 0},
        {"samples": 0},
        {"measure": "product"},
        {"measure": "product", "weights": "0.5,0.5"},
        {"measure": "product", "weights": "0.5,0.6,-0.1"},
        {"measure": "product", "weights": "0.2,0.2,0.2"},
        {"f": "1,2"},
        {"exact_cap": 60},
        {"depth": "deep"},
    ],
)
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        RunConfig.resolve(overrides, environ={})


def test_product_weights_parse():
    config = RunConfig.resolve({"measure": "product", "weights": "0.2,0.3,0.5"}, environ={})
    assert config.weights == (0.2, 0.3, 0.5)


def test_bad_environment():
    with pytest.raises(ConfigError, match="GASKET_SEED"):
        RunConfig.resolve({}, environ={"GASKET_SEED": "x"})


def test_bad_config_files(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.resolve({}, str(tmp_path / "missing.json"), environ={})
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    with pytest.raises(ConfigError):
        RunConfig.resolve({}, str(broken), environ={})
    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        RunConfig.resolve({}, str(listed), environ={})
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"colour": "red"}))
    with pytest.raises(ConfigError, match="colour"):
        RunConfig.resolve({}, str(unknown), environ={})


def test_third_range_bins():
    assert RunConfig.resolve({"range": "third"}, environ={}).effective_bins() == 2000
    assert RunConfig.resolve({"range": "third", "bins": 12}, environ={}).effective_bins() == 12


def test_metadata_excludes_non_result_fields():
    config = RunConfig.resolve(
        {"threads": 4, "out": "x.csv", "timing": True, "f": "0,1,1"}, environ={}
    )
    metadata = config.to_metadata()
    assert "threads" not in metadata
    assert "out" not in metadata
    assert "timing" not in metadata
    assert metadata["f"] == [0.0, 1.0, 1.0]
    assert list(metadata)[0] == "level"


def test_parse_floats():
    assert parse_floats("1, 2,3", "f") == (1.0, 2.0, 3.0)
    assert parse_floats([1, 2], "f") == (1.0, 2.0)
    with pytest.raises(ConfigError):
        parse_floats("a,b", "f")
