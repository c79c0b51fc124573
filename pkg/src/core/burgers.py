"""
Burgers equation lambda_t + lambda*lambda_x = 0 by characteristics.

A solution is read off the initial datum: the value at (t, x) is the datum
value at the foot r of the characteristic x = lambda0(r)*t + r. The datum is
a LambdaProfile whose pieces already carry their characteristic charts, so
inverting a characteristic is a bracketed scalar solve on one piece.

Spatial derivatives follow the chart as well:

    d lambda / dx   = lambda_p / X_p
    d2 lambda / dx2 = (lambda_pp * X_p - lambda_p * X_pp) / X_p^3

Higher orders use nested central differences.

Philosophy:
- Never track shocks; refuse queries inside the post-collapse cone
- Derivatives from closed forms, finite differences as a cross-check
- Tables out through pandas so the CLI writes them verbatim
"""

from typing import Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from src.core.euler_map import density_from_speed, momentum_from_speed
from src.core.exceptions import CharacteristicsError, DomainError, ShockConeError
from src.core.models import CheckResult, ShockBounds
from src.core.profiles import LambdaProfile, cone_slopes
from src.utils.logger import get_logger
from src.utils.roots import XTOL, adaptive_step, central_difference, five_point_second_derivative

logger = get_logger()


class CharSolution(BaseModel):
    """Burgers solution generated by an initial datum."""

    profile: LambdaProfile
    root_tolerance: float = Field(default=1e-10, gt=0.0)

    model_config = ConfigDict(frozen=True)

    @property
    def T(self):
        """Collapse time of the datum (None if characteristics never meet)."""
        return self.profile.collapse_time


# ============================================================================
# CHARACTERISTICS
# ============================================================================

def _locate(t: float, x2: float, sol: CharSolution) -> Tuple[int, float]:
    if t < 0.0:
        raise DomainError(f"time must be nonnegative, got t={t}")
    index, p = sol.profile.locate(t, x2, xtol=XTOL)

    piece = sol.profile.pieces[index]
    arrival = float(piece.position(t, p))
    if abs(arrival - x2) > sol.root_tolerance * max(1.0, abs(x2)):
        raise CharacteristicsError(
            f"characteristic misses x={x2} at t={t} by {abs(arrival - x2):.3g}"
        )
    return index, p


def char_foot(t: float, x2: float, sol: CharSolution) -> float:
    """
    Foot r of the characteristic through (t, x2), so x2 = lambda0(r)*t + r.

    Raises:
        DomainError: t < 0
        ShockConeError: (t, x2) inside the cone after collapse
        CharacteristicsError: no characteristic reaches (t, x2)
    """
    index, p = _locate(t, x2, sol)
    return float(sol.profile.pieces[index].position(0.0, p))


def eval_solution(t: float, x2: float, sol: CharSolution) -> float:
    """lambda1(t, x2) = lambda0(char_foot(t, x2))."""
    index, p = _locate(t, x2, sol)
    return float(sol.profile.pieces[index].speed(p))


def eval_dx(t: float, x2: float, sol: CharSolution, n: int = 1) -> float:
    """
    n-th spatial derivative of lambda1 at (t, x2).

    Raises:
        DomainError: n < 1
        CharacteristicsError: the characteristic map is singular at (t, x2)
    """
    if n < 1:
        raise DomainError(f"derivative order must be >= 1, got {n}")
    if n >= 3:
        h = adaptive_step(x2)
        return central_difference(lambda y: eval_dx(t, y, sol, n - 1), x2, h)

    index, p = _locate(t, x2, sol)
    piece = sol.profile.pieces[index]
    x_p = float(piece.position_dp(t, p))
    if x_p == 0.0:
        raise CharacteristicsError(f"characteristics focus at (t={t}, x={x2})")

    lam_p = float(piece.speed_dp(p))
    if n == 1:
        return lam_p / x_p
    lam_pp = float(piece.speed_dpp(p))
    x_pp = float(piece.position_dpp(t, p))
    return (lam_pp * x_p - lam_p * x_pp) / x_p ** 3


def eval_dx_fd(t: float, x2: float, sol: CharSolution, n: int = 1, h: float = 0.0) -> float:
    """Finite-difference estimate of the n-th derivative of eval_solution."""
    step = h or adaptive_step(x2)
    if n == 1:
        return central_difference(lambda y: eval_solution(t, y, sol), x2, step)
    if n == 2:
        return five_point_second_derivative(lambda y: eval_solution(t, y, sol), x2, step)
    return central_difference(lambda y: eval_dx_fd(t, y, sol, n - 1, step), x2, step)


# ============================================================================
# SHOCK CONE
# ============================================================================

def shock_bounds(lambda_minus: float, lambda_plus: float, zeta2: float, T: float) -> ShockBounds:
    """
    Rays s-(t) <= s(t) <= s+(t) bounding the shock born at the collapse.

    Raises:
        DomainError: lambda_minus <= lambda_plus, zeta2 < 0 or T <= 0
    """
    if not lambda_minus > lambda_plus:
        raise DomainError("shock bounds need lambda_minus > lambda_plus")
    if zeta2 < 0.0 or not T > 0.0:
        raise DomainError(f"need zeta2 >= 0 and T > 0, got zeta2={zeta2}, T={T}")
    s_minus, s_plus = cone_slopes(lambda_minus, lambda_plus, zeta2, T)
    return ShockBounds(s_minus_slope=s_minus, s_plus_slope=s_plus)


# ============================================================================
# CHECKS AND SAMPLING
# ============================================================================

def check_non_crossing(sol: CharSolution, t: float, xs: Sequence[float]) -> CheckResult:
    """Feet must increase strictly with x2 along a sampled row at time t."""
    feet = np.array([char_foot(t, float(x), sol) for x in xs])
    steps = np.diff(feet)
    smallest = float(np.min(steps)) if len(steps) else 0.0
    passed = bool(np.all(steps > 0.0))
    if not passed:
        logger.warning("Characteristics cross", t=t, smallest_step=smallest)
    return CheckResult(name="non_crossing", passed=passed, value=smallest, threshold=0.0)


def sample_solution(sol: CharSolution, times: Iterable[float], xs: Iterable[float]) -> pd.DataFrame:
    """
    Table of (t, x2, lambda1) on a tensor grid.

    Points inside the shock cone are left out.
    """
    rows: List[Tuple[float, float, float]] = []
    skipped = 0
    xs = [float(x) for x in xs]
    for t in times:
        for x in xs:
            try:
                rows.append((float(t), x, eval_solution(float(t), x, sol)))
            except ShockConeError:
                skipped += 1

    if skipped:
        logger.debug("Skipped points inside the shock cone", count=skipped)
    return pd.DataFrame(rows, columns=["t", "x2", "lambda1"])


def euler_fields(table: pd.DataFrame, w1: float) -> pd.DataFrame:
    """Append density and momentum of the 1-simple wave to a lambda1 table."""
    out = table.copy()
    out["rho"] = density_from_speed(out["lambda1"].to_numpy(), w1)
    out["m2"] = momentum_from_speed(out["lambda1"].to_numpy(), w1)
    return out


def conservation_residual(
    sol: CharSolution,
    w1: float,
    times: Iterable[float],
    xs: Iterable[float],
    h: float,
) -> float:
    """
    Largest centered-difference residual of the 1-D isentropic Euler system.

    Evaluates rho_t + (m2)_x and (m2)_t + (m2^2/rho + rho^2)_x with step h
    in both t and x; the residual is O(h^2) on smooth regions.
    """

    def fields(t: float, x: float) -> Tuple[float, float, float]:
        lam = eval_solution(t, x, sol)
        rho = float(density_from_speed(lam, w1))
        m = float(momentum_from_speed(lam, w1))
        return rho, m, m * m / rho + rho * rho

    worst = 0.0
    xs = [float(x) for x in xs]
    for t in times:
        for x in xs:
            rho_f, m_f, _ = fields(t + h, x)
            rho_b, m_b, _ = fields(t - h, x)
            _, m_r, flux_r = fields(t, x + h)
            _, m_l, flux_l = fields(t, x - h)
            mass = (rho_f - rho_b) / (2 * h) + (m_r - m_l) / (2 * h)
            momentum = (m_f - m_b) / (2 * h) + (flux_r - flux_l) / (2 * h)
            worst = max(worst, abs(mass), abs(momentum))
    return worst
