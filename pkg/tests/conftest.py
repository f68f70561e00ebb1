"""Shared fixtures: SG_2 and SG_3 structures and energy models."""

import pytest

from src.services.energy_model import EnergyModel
from src.services.structure_builder import StructureBuilder


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running sweeps (deselect with -m 'not slow')")


@pytest.fixture(scope="session")
def builder():
    return StructureBuilder()


@pytest.fixture(scope="session")
def sg2(builder):
    return builder.build_harmonic_structure(2)


@pytest.fixture(scope="session")
def sg3(builder):
    return builder.build_harmonic_structure(3)


@pytest.fixture(scope="session")
def sg2_float(builder):
    return builder.build_harmonic_structure(2, backend="float")


@pytest.fixture(scope="session")
def model2(sg2):
    return EnergyModel.from_structure(sg2)


@pytest.fixture(scope="session")
def model3(sg3):
    return EnergyModel.from_structure(sg3)
