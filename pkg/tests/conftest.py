"""
Shared fixtures.

The default fan solve and the datum reconstructed from it take a few
seconds, so they are built once per test session.
"""

import math

import pytest

from src.core.config import ScenarioConfig
from src.core.initial_data import build_initial_datum, fan_curves, pullback_h
from src.core.models import F0Params, FanConstants, HSpec, Side
from src.core.ode_epsilon import TraceSpec, picard_solve
from src.core.profiles import build_compression_datum

SQRT2 = math.sqrt(2.0)


@pytest.fixture(scope="session")
def scenario() -> ScenarioConfig:
    return ScenarioConfig()


@pytest.fixture(scope="session")
def consts() -> FanConstants:
    return FanConstants()


@pytest.fixture(scope="session")
def trace_spec() -> TraceSpec:
    return TraceSpec()


@pytest.fixture(scope="session")
def fan_solution(trace_spec, consts):
    return picard_solve(trace_spec, consts, T_end=0.05, grid_size=2048, tol=1e-10, t_min=1e-8)


@pytest.fixture(scope="session")
def fan(fan_solution, trace_spec, consts):
    return fan_curves(fan_solution, trace_spec, consts)


@pytest.fixture(scope="session")
def pullback_maps(fan, trace_spec, consts):
    left = pullback_h(Side.LEFT, fan, trace_spec, consts)
    right = pullback_h(Side.RIGHT, fan, trace_spec, consts)
    return left, right


@pytest.fixture(scope="session")
def datum(pullback_maps, trace_spec, fan):
    left, right = pullback_maps
    return build_initial_datum(left, right, trace_spec, fan, zeta1=0.3, T=1.0)


@pytest.fixture(scope="session")
def compression_datum():
    """Default compression wave: T = 1, zeta1 = 0.3, zeta2 = 0.05, a = 0.05."""
    f0p = F0Params.from_wave(SQRT2, -2 * SQRT2, 1.0, 0.05, 0.05, 0.05, 0.075)
    return build_compression_datum(SQRT2, -2 * SQRT2, 1.0, 0.3, 0.05, f0p, HSpec())
