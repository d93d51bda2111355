import math

import numpy as np
import pytest

from src.experiments.generator import RoomConfig, SimulationDefaults, gen_scenario
from src.noma.noma_model import build_scenario, dbm_to_mw

NOISE_MW = dbm_to_mw(-104.0)


def make_scenario(gains, noise_power=NOISE_MW, p_max=16.0, dc_bias=20.0, peak_intensity=30.0,
                  pam_coefficient=1.0):
    return build_scenario(gains, noise_power, p_max, dc_bias, peak_intensity, pam_coefficient)


def random_scenario(rng: np.random.Generator, num_users: int, p_max: float = 16.0):
    gains = 10.0 ** rng.uniform(-10.0, -8.0, size=num_users)
    return make_scenario(gains.tolist(), noise_power=1e-9, p_max=p_max)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def two_user_scenario():
    return make_scenario([1e-8, 4e-8], noise_power=3.98e-11)


@pytest.fixture(scope="session")
def room_scenario():
    """Default 20-user drop, fixed seed"""
    return gen_scenario(RoomConfig(seed=11), SimulationDefaults(pam_coefficient=1.0))


def rel_close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b), math.ulp(1.0))
