"""
Map between Burgers characteristic speeds and isentropic Euler states.

For the pressure law p(rho) = rho^2 the sound speed is sqrt(2*rho) and the
Riemann invariants are w1 = v2 + sqrt(8*rho), w2 = v2 - sqrt(8*rho). With w1
held constant, a 1-simple wave is fully described by lambda1 = v2 - sqrt(2*rho):

    rho = (w1 - lambda1)^2 / 18,    v2 = (2*lambda1 + w1) / 3.

The momentum is therefore m2 = (w1 - lambda1)^2 (2*lambda1 + w1) / 54. The
variant with (2*lambda1 - w1) is kept as ``printed_momentum`` only so that
verification can show it contradicts the Riemann endpoint states.

Scalar functions take and return models; the ``*_from_speed`` kernels are
numpy-vectorized for the trace and sampling pipelines.
"""

import math
from typing import Union

import numpy as np

from src.core.exceptions import DomainError
from src.core.models import EulerState, WaveCoordinates

ArrayLike = Union[float, np.ndarray]


# ============================================================================
# PRESSURE LAW
# ============================================================================

def pressure(rho: ArrayLike) -> ArrayLike:
    """p(rho) = rho^2."""
    return rho * rho


def sound_speed(rho: ArrayLike) -> ArrayLike:
    """sqrt(p'(rho)) = sqrt(2*rho)."""
    return np.sqrt(2.0 * rho)


def internal_energy(rho: ArrayLike) -> ArrayLike:
    """e(rho) with p = rho^2 e'(rho); equals rho for the quadratic law."""
    return rho


# ============================================================================
# STATE <-> WAVE COORDINATES
# ============================================================================

def wave_from_state(state: EulerState) -> WaveCoordinates:
    """
    Characteristic speeds and Riemann invariants of a state.

    Raises:
        DomainError: nonpositive density
    """
    if not state.rho > 0.0:
        raise DomainError(f"density must be positive, got {state.rho}")
    v2 = state.m2 / state.rho
    c = math.sqrt(2.0 * state.rho)
    r = math.sqrt(8.0 * state.rho)
    return WaveCoordinates(lambda1=v2 - c, lambda2=v2 + c, w1=v2 + r, w2=v2 - r)


def density_from_speed(lambda1: ArrayLike, w1: float) -> ArrayLike:
    return (w1 - lambda1) ** 2 / 18.0


def momentum_from_speed(lambda1: ArrayLike, w1: float) -> ArrayLike:
    return (w1 - lambda1) ** 2 * (2.0 * lambda1 + w1) / 54.0


def printed_momentum(lambda1: ArrayLike, w1: float) -> ArrayLike:
    """Momentum with the (2*lambda1 - w1) factor; inconsistent with the invariants."""
    return (w1 - lambda1) ** 2 * (2.0 * lambda1 - w1) / 54.0


def density_speed_derivative(lambda1: ArrayLike, w1: float) -> ArrayLike:
    """d rho / d lambda1 along w1 = const."""
    return -(w1 - lambda1) / 9.0


def momentum_speed_derivative(lambda1: ArrayLike, w1: float) -> ArrayLike:
    """d m2 / d lambda1 along w1 = const."""
    return -lambda1 * (w1 - lambda1) / 9.0


def state_from_wave(lambda1: float, w1: float) -> EulerState:
    """
    Reconstruct (rho, m2) on the 1-family with Riemann invariant w1.

    Raises:
        DomainError: w1 <= lambda1 (vacuum or beyond)
    """
    if not w1 > lambda1:
        raise DomainError(f"w1 must exceed lambda1, got w1={w1}, lambda1={lambda1}")
    return EulerState(
        rho=float(density_from_speed(lambda1, w1)),
        m1=0.0,
        m2=float(momentum_from_speed(lambda1, w1)),
    )


def state_from_velocity(rho: float, v2: float, v1: float = 0.0) -> EulerState:
    return EulerState(rho=rho, m1=rho * v1, m2=rho * v2)


# ============================================================================
# ENERGY
# ============================================================================

def energy_density(state: EulerState) -> float:
    """Total energy rho*e(rho) + |m|^2/(2 rho) = rho^2 + |m|^2/(2 rho)."""
    if not state.rho > 0.0:
        raise DomainError(f"density must be positive, got {state.rho}")
    return state.rho ** 2 + (state.m1 ** 2 + state.m2 ** 2) / (2.0 * state.rho)


def energy_flux(state: EulerState) -> float:
    """x2 component of the energy flux (rho*e + p + |m|^2/(2 rho)) * m2/rho."""
    rho = state.rho
    kinetic = (state.m1 ** 2 + state.m2 ** 2) / (2.0 * rho)
    return (rho * internal_energy(rho) + pressure(rho) + kinetic) * state.m2 / rho
