"""
Bracketed root finding and finite-difference helpers.

All characteristic inversions in the toolkit reduce to a scalar equation
that is continuous and monotone on a known parameter interval, so Brent's
method on a sign-changing bracket is both robust and fast. Finite
differences are used only as cross-checks and for derivative orders with
no closed form.
"""

from typing import Callable, List, Tuple

import numpy as np
from scipy.optimize import brentq

from src.core.exceptions import CharacteristicsError

# Smallest relative tolerance brentq accepts
RTOL = 4.0 * np.finfo(float).eps
XTOL = 1e-300
MAX_ITER = 500


def solve_bracketed(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = XTOL,
    rtol: float = RTOL,
    maxiter: int = MAX_ITER,
) -> float:
    """
    Find the root of ``fn`` on ``[lo, hi]``.

    Args:
        fn: Continuous scalar function with a sign change on the bracket
        lo, hi: Bracket ends
        xtol, rtol: Absolute/relative tolerance passed to brentq

    Returns:
        Root location

    Raises:
        CharacteristicsError: no sign change or no convergence
    """
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise CharacteristicsError(
            f"no sign change on [{lo:.17g}, {hi:.17g}]: f = ({f_lo:.3g}, {f_hi:.3g})"
        )

    root, result = brentq(
        fn, lo, hi, xtol=xtol, rtol=rtol, maxiter=maxiter, full_output=True, disp=False
    )
    if not result.converged:
        raise CharacteristicsError(
            f"root search did not converge after {result.iterations} iterations"
        )
    return root


def sign_change_brackets(params: np.ndarray, values: np.ndarray) -> List[Tuple[float, float]]:
    """Return consecutive parameter pairs across which ``values`` changes sign."""
    brackets = []
    for i in range(len(params) - 1):
        v0, v1 = values[i], values[i + 1]
        if not (np.isfinite(v0) and np.isfinite(v1)):
            continue
        if v0 == 0.0:
            brackets.append((params[i], params[i]))
        elif v0 * v1 < 0.0:
            brackets.append((params[i], params[i + 1]))
    if len(values) and values[-1] == 0.0:
        brackets.append((params[-1], params[-1]))
    return brackets


def central_difference(fn: Callable[[float], float], x: float, h: float) -> float:
    """Second-order central difference of ``fn`` at ``x``."""
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def five_point_second_derivative(fn: Callable[[float], float], x: float, h: float) -> float:
    """Fourth-order five-point stencil for the second derivative."""
    return (
        -fn(x + 2 * h) + 16 * fn(x + h) - 30 * fn(x) + 16 * fn(x - h) - fn(x - 2 * h)
    ) / (12.0 * h * h)


def adaptive_step(x: float) -> float:
    """Finite-difference step scaled to the evaluation point."""
    return max(1e-6 * abs(x), 1e-12)
