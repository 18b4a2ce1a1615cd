"""Common test fixtures for starcluster tests."""
from __future__ import annotations

import os
import sys

import pytest

# Add the repository root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from starcluster.core.config_manager import config_manager  # noqa: E402
from starcluster.models.config import Conventions  # noqa: E402
from starcluster.models.params import ProtocolParams, Variant  # noqa: E402
from starcluster.suite import chain_circuit  # noqa: E402

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(autouse=True)
def _fixed_seed_env(monkeypatch):
    """Keep the environment from changing default seeds."""
    monkeypatch.delenv("STARCLUSTER_SEED", raising=False)


@pytest.fixture
def chain3():
    """Three-qubit linear cluster with both ends kept."""
    return chain_circuit(3)


@pytest.fixture
def p1_params():
    """P1 parameters at p_s = 0.9 and the matching minimal L."""
    return ProtocolParams(variant=Variant.P1, p_s=0.9, L=7, seed=1234)


@pytest.fixture
def p2_params():
    """P2 parameters with the default cherry geometry."""
    return ProtocolParams(
        variant=Variant.P2,
        p_s=0.9,
        L=7,
        seed=1234,
        geometry=config_manager.get_geometry("default"),
    )


@pytest.fixture
def depolarizing():
    """Conventions with depolarizing preparation and measurement noise."""
    return Conventions(measurement_convention="depolarizing", prep_convention="depolarizing")


@pytest.fixture
def read_fixture():
    """Return a reader for files under tests/fixtures."""

    def read(name: str) -> str:
        with open(os.path.join(FIXTURES, name), encoding="utf-8") as f:
            return f.read()

    return read
