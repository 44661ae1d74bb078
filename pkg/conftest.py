"""Shared fixtures for the merge simulation test suites."""
import os

import numpy as np
import pytest

from src.agents.driver import DriverSettings
from src.agents.population import Population, Regime
from src.controller.params import ControllerConfig
from src.environment.dynamics import BodyGeometry
from src.environment.road import Road
from src.environment.world import World
from src.utils.seeding import SeedStreams

SLOW_ENV = "DENSE_MERGE_SLOW"


def pytest_configure(config):
    config.addinivalue_line("markers", f"slow: statistical or timing acceptance runs (set {SLOW_ENV}=1)")


def pytest_collection_modifyitems(config, items):
    if os.environ.get(SLOW_ENV) == "1":
        return
    skip = pytest.mark.skip(reason=f"slow; set {SLOW_ENV}=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def geom():
    return BodyGeometry()


@pytest.fixture
def road():
    return Road()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def quiet_settings():
    """Driver behaviour without oscillation or acceleration noise."""
    return DriverSettings(accel_noise=0.0, oscillation_amplitude=0.0)


@pytest.fixture
def make_world(road, quiet_settings):
    def factory(regime=Regime.MIXED, seed=0, dt=0.4, settings=None):
        population = Population(regime=Regime.parse(regime), settings=settings or quiet_settings)
        return World(road, population, SeedStreams(seed), dt)
    return factory


@pytest.fixture
def small_controller():
    """Cheap controller configuration for episode-level tests."""
    return ControllerConfig(N_sim=8, workers=1)
