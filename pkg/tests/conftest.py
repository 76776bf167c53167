import os

import pytest
from hypothesis import HealthCheck, settings

from gcsim import engine, presets
from gcsim.io import scenario_from_dict
from gcsim.params import ParamSet

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def hw_params():
    """2 GHz hardware parameters with mu = 10 rho."""
    return ParamSet(**presets.HARDWARE_PARAMS)


@pytest.fixture
def grid_params():
    return ParamSet(**presets.GRID_PARAMS)


@pytest.fixture
def code_params():
    """kappa = 10, delta = 5, epsilon = 1 (delta set directly, as in the worked code examples)."""
    return ParamSet(kappa=10.0, delta=5.0, delta0=4.0, epsilon=1.0, ell=2)


def preset_scenario(name, **overrides):
    return scenario_from_dict(dict(presets.get(name), **overrides))


@pytest.fixture(scope="session")
def ahead_run():
    sc = preset_scenario("paper-line4-ahead")
    return sc, engine.run(sc)


@pytest.fixture(scope="session")
def behind_run():
    sc = preset_scenario("paper-line4-behind")
    return sc, engine.run(sc)
