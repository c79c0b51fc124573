"""
Fan subsolution algebra on the two interfaces.

The fan region between nu_-(t) and nu_+(t) carries a constant density rho1,
a momentum (alpha, beta) and a trace-free matrix u1 = [[gamma1, gamma2],
[gamma2, -gamma1]]. With alpha = gamma2 = 0 the Rankine-Hugoniot conditions
on both interfaces reduce to four scalar equations in (nu_-, nu_+, beta,
eps2) once eps_delta = eps2L - eps2R is fixed, and they have a closed-form
solution. Writing

    R = rho_- - rho_+,  A = m_- - m_+,
    H = m_-^2/rho_- - m_+^2/rho_+ + rho_-^2 - rho_+^2,  B = A^2 - R*H,
    a = rho1 - rho_-,   c = rho_+ - rho1,   S = (-B + R*eps_delta)*a*c,

the branch used throughout is

    nu_- = A/R + sqrt((-B + R eps) c/a) / R
    nu_+ = A/R - sqrt((-B + R eps) a/c) / R
    beta = (-m_- c - m_+ a)/R + sqrt(S) / R

and eps1 follows from the flux identity 2 rho1^2 + (beta^2/rho1 + eps1 +
eps2)/2 = rho1 K.

Admissibility and subsolution margins are reported as RHS - LHS, so a
strictly admissible subsolution has every margin strictly positive.

Philosophy:
- Closed forms first; residuals are the oracle
- Report-producing functions never raise on a failed check
- The full system (alpha, gamma2 free) exists only to confirm the reductions
"""

import itertools
import math
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.burgers import shock_bounds
from src.core.euler_map import energy_density, internal_energy, pressure, state_from_wave
from src.core.exceptions import RadicandError
from src.core.models import (
    EulerState,
    FanConstants,
    InterfaceSolution,
    InterfaceStates,
    VerificationReport,
)
from src.utils.logger import get_logger

logger = get_logger()

SQRT2 = math.sqrt(2.0)
SQRT8 = math.sqrt(8.0)
SQRT13 = math.sqrt(13.0)
SQRT26 = math.sqrt(26.0)
SQRT32 = math.sqrt(32.0)

RH_TOLERANCE = 1e-12


# ============================================================================
# INTERFACE ALGEBRA
# ============================================================================

def rab_quantities(s: InterfaceStates) -> Tuple[float, float, float, float]:
    """
    Return (R, A, H, B) for the interface traces.

    The baseline traces (1, sqrt8, 4, 0) give (-3, sqrt8, -7, -13).
    """
    rm, mm, rp, mp = s.as_tuple()
    R = rm - rp
    A = mm - mp
    H = mm * mm / rm - mp * mp / rp + rm * rm - rp * rp
    return R, A, H, A * A - R * H


def rab_product_form(s: InterfaceStates) -> float:
    """B = rho_- rho_+ (v_- - v_+)^2 - (rho_- - rho_+)^2 (rho_- + rho_+)."""
    rm, mm, rp, mp = s.as_tuple()
    dv = mm / rm - mp / rp
    return rm * rp * dv * dv - (rm - rp) ** 2 * (rm + rp)


def interface_kernel(
    rho_minus,
    m_minus,
    rho_plus,
    m_plus,
    consts: FanConstants,
    eps_delta,
    partials: bool = False,
) -> Dict[str, np.ndarray]:
    """
    Vectorized closed-form branch.

    Accepts scalars or equally shaped arrays of traces and eps_delta and
    returns nu_minus, nu_plus, beta, eps2L, the length rate nu_+ - nu_- and
    the coefficient f = d beta / d eps_delta. With ``partials`` it also
    returns the gradient of beta in the four traces.

    Raises:
        RadicandError: rho_- >= rho1, rho_+ <= rho1 or -B + R*eps_delta <= 0
            anywhere in the input
    """
    rm, mm, rp, mp, eps = (
        np.asarray(v, dtype=float) for v in (rho_minus, m_minus, rho_plus, m_plus, eps_delta)
    )
    rho1, K = consts.rho1, consts.K

    a = rho1 - rm
    c = rp - rho1
    if not (np.all(a > 0.0) and np.all(c > 0.0)):
        raise RadicandError(
            f"density ordering rho_- < rho1 < rho_+ violated: "
            f"rho_- up to {np.max(rm):.6g}, rho_+ down to {np.min(rp):.6g}, rho1={rho1}"
        )

    R = rm - rp
    A = mm - mp
    H = mm * mm / rm - mp * mp / rp + rm * rm - rp * rp
    B = A * A - R * H
    D = -B + R * eps
    if not np.all(D > 0.0):
        raise RadicandError(
            f"radicand -B + R*eps_delta reaches {np.min(D):.6g}; eps_delta out of range"
        )

    root = np.sqrt(D * a * c)
    N = -mm * c - mp * a
    nu_minus = A / R + np.sqrt(D * c / a) / R
    nu_plus = A / R - np.sqrt(D * a / c) / R

    out = {
        "nu_minus": nu_minus,
        "nu_plus": nu_plus,
        "beta": (N + root) / R,
        "eps2L": nu_minus ** 2 * (rm - rho1) - mm * mm / rm - rm * rm + 2 * rho1 * K - 3 * rho1 ** 2,
        "width_rate": nu_plus - nu_minus,
        "f": a * c / (2 * root),
    }
    if not partials:
        return out

    dD = {
        "rho_minus": H + eps + R * (2 * rm - mm * mm / (rm * rm)),
        "m_minus": -2 * A + R * 2 * mm / rm,
        "rho_plus": -(H + eps) + R * (mp * mp / (rp * rp) - 2 * rp),
        "m_plus": 2 * A - R * 2 * mp / rp,
    }
    dS = {
        "rho_minus": dD["rho_minus"] * a * c - D * c,
        "m_minus": dD["m_minus"] * a * c,
        "rho_plus": dD["rho_plus"] * a * c + D * a,
        "m_plus": dD["m_plus"] * a * c,
    }
    dN = {"rho_minus": mp, "m_minus": -c, "rho_plus": -mm, "m_plus": -a}
    dR = {"rho_minus": 1.0, "m_minus": 0.0, "rho_plus": -1.0, "m_plus": 0.0}
    for key in dD:
        out[f"d_{key}"] = (dN[key] + dS[key] / (2 * root)) / R - (N + root) * dR[key] / (R * R)
    return out


def solve_interface(s: InterfaceStates, consts: FanConstants, eps_delta: float) -> InterfaceSolution:
    """
    Closed-form solution of the reduced Rankine-Hugoniot system.

    Args:
        s: Outer traces on both interfaces
        consts: rho1 and K of the fan
        eps_delta: eps2L - eps2R

    Raises:
        RadicandError: rho_- >= rho1, rho_+ <= rho1 or -B + R*eps_delta <= 0
    """
    k = interface_kernel(*s.as_tuple(), consts, eps_delta)
    rho1, K = consts.rho1, consts.K
    nu_minus, nu_plus, beta = float(k["nu_minus"]), float(k["nu_plus"]), float(k["beta"])

    eps2L = float(k["eps2L"])
    eps2R = eps2L - eps_delta
    C1 = consts.C1
    kinetic = beta * beta / rho1
    eps1_left = epsilon1_from_K(rho1, beta, eps2L, K)
    eps1_right = epsilon1_from_K(rho1, beta, eps2R, K)

    return InterfaceSolution(
        nu_minus=nu_minus,
        nu_plus=nu_plus,
        beta=beta,
        eps2L=eps2L,
        eps2R=eps2R,
        eps_delta=eps_delta,
        eps1_left=eps1_left,
        eps1_right=eps1_right,
        C1=C1,
        gamma1_left=C1 / 2 - eps1_left - kinetic,
        gamma1_right=C1 / 2 - eps1_right - kinetic,
    )


def rh_residuals(
    s: InterfaceStates, consts: FanConstants, sol: InterfaceSolution
) -> Tuple[float, float, float, float]:
    """LHS - RHS of (left continuity, left momentum, right continuity, right momentum)."""
    rm, mm, rp, mp = s.as_tuple()
    rho1, K = consts.rho1, consts.K
    nl, nr, beta = sol.nu_minus, sol.nu_plus, sol.beta

    left_mass = nl * (rm - rho1) - (mm - beta)
    left_momentum = nl * (mm - beta) - (
        mm * mm / rm + rm * rm - 2 * rho1 * K + 3 * rho1 ** 2 + sol.eps2L
    )
    right_mass = nr * (rho1 - rp) - (beta - mp)
    right_momentum = nr * (beta - mp) - (
        2 * rho1 * K - 3 * rho1 ** 2 - sol.eps2R - mp * mp / rp - rp * rp
    )
    return left_mass, left_momentum, right_mass, right_momentum


def admissibility_kernel(rm, mm, rp, mp, consts: FanConstants, beta, nu_minus, nu_plus):
    """Vectorized energy-inequality margins (RHS - LHS) on both interfaces."""
    rho1, K = consts.rho1, consts.K
    left = (
        2 * rm * mm + mm ** 3 / (2 * rm * rm) - beta * K
        - nu_minus * (rm * rm + rho1 * rho1 + mm * mm / (2 * rm) - rho1 * K)
    )
    right = (
        beta * K - 2 * rp * mp - mp ** 3 / (2 * rp * rp)
        - nu_plus * (rho1 * K - rho1 * rho1 - rp * rp - mp * mp / (2 * rp))
    )
    return left, right


def admissibility_margins(
    s: InterfaceStates, consts: FanConstants, sol: InterfaceSolution
) -> Tuple[float, float]:
    """Energy-inequality margins (RHS - LHS) on the left and right interfaces."""
    left, right = admissibility_kernel(*s.as_tuple(), consts, sol.beta, sol.nu_minus, sol.nu_plus)
    return float(left), float(right)


def epsilon1_from_K(rho1: float, beta: float, eps2: float, K: float) -> float:
    """eps1 = 2 rho1 K - 4 rho1^2 - beta^2/rho1 - eps2."""
    return 2 * rho1 * K - 4 * rho1 ** 2 - beta * beta / rho1 - eps2


def K_from_epsilon1(rho1: float, beta: float, eps1: float, eps2: float) -> float:
    """Invert the flux identity for K."""
    return (2 * rho1 ** 2 + 0.5 * (beta * beta / rho1 + eps1 + eps2)) / rho1


# ============================================================================
# SUBSOLUTION CONDITIONS
# ============================================================================

def subsolution_margins(sol: InterfaceSolution) -> Tuple[float, float, float]:
    """Return (eps1, eps2L, eps2R); eps1 is the smaller of its interface values."""
    return sol.eps1, sol.eps2L, sol.eps2R


def fan_matrix(rho1: float, m: Sequence[float], u: Sequence[Sequence[float]], C1: float) -> np.ndarray:
    """(C1/2) I - m (x) m / rho1 + u1."""
    m = np.asarray(m, dtype=float)
    return 0.5 * C1 * np.eye(2) - np.outer(m, m) / rho1 + np.asarray(u, dtype=float)


def matrix_pd_check(rho1: float, m: Sequence[float], u: Sequence[Sequence[float]], C1: float) -> bool:
    """Positive definiteness of the fan matrix by leading principal minors."""
    M = fan_matrix(rho1, m, u, C1)
    return bool(M[0, 0] > 0.0 and M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0] > 0.0)


def trace_matrix(gamma1: float, gamma2: float = 0.0) -> np.ndarray:
    return np.array([[gamma1, gamma2], [gamma2, -gamma1]])


# ============================================================================
# FULL SYSTEM (alpha, gamma2 free)
# ============================================================================

def full_system_residuals(
    left: EulerState,
    right: EulerState,
    rho1: float,
    nu_minus: float,
    nu_plus: float,
    alpha: float,
    beta: float,
    gamma1: float,
    gamma2: float,
    C1: float,
) -> Dict[str, float]:
    """
    Jump conditions and inequalities of the fan subsolution without the ansatz.

    Equalities are returned as LHS - RHS, inequalities as margins that must
    be positive. The internal energy is e(rho) = rho and p(rho) = rho^2.
    """
    rm, mm1, mm2 = left.rho, left.m1, left.m2
    rp, mp1, mp2 = right.rho, right.m1, right.m2
    p1 = pressure(rho1)
    e1 = internal_energy(rho1)
    half_c = 0.5 * C1

    out = {
        "continuity_left": nu_minus * (rm - rho1) - (mm2 - beta),
        "continuity_right": nu_plus * (rho1 - rp) - (beta - mp2),
        "momentum1_left": nu_minus * (mm1 - alpha) - (mm1 * mm2 / rm - gamma2),
        "momentum1_right": nu_plus * (alpha - mp1) - (gamma2 - mp1 * mp2 / rp),
        "momentum2_left": nu_minus * (mm2 - beta)
        - (mm2 * mm2 / rm + gamma1 + pressure(rm) - p1 - half_c),
        "momentum2_right": nu_plus * (beta - mp2)
        - (-gamma1 - mp2 * mp2 / rp + p1 - pressure(rp) + half_c),
    }

    mom_left = mm1 * mm1 + mm2 * mm2
    mom_right = mp1 * mp1 + mp2 * mp2
    rhoe_left, rhoe_right, rhoe1 = rm * internal_energy(rm), rp * internal_energy(rp), rho1 * e1

    lhs_left = nu_minus * (rhoe_left - rhoe1) + nu_minus * (mom_left / (2 * rm) - half_c)
    rhs_left = (
        (rhoe_left + pressure(rm)) * mm2 / rm - (rhoe1 + p1) * beta / rho1
        + mm2 * mom_left / (2 * rm * rm) - beta * C1 / (2 * rho1)
    )
    lhs_right = nu_plus * (rhoe1 - rhoe_right) + nu_plus * (half_c - mom_right / (2 * rp))
    rhs_right = (
        (rhoe1 + p1) * beta / rho1 - (rhoe_right + pressure(rp)) * mp2 / rp
        + beta * C1 / (2 * rho1) - mp2 * mom_right / (2 * rp * rp)
    )
    out["energy_left"] = rhs_left - lhs_left
    out["energy_right"] = rhs_right - lhs_right

    out["trace_margin"] = rho1 * C1 - alpha * alpha - beta * beta
    m11 = half_c - alpha * alpha / rho1 + gamma1
    m22 = half_c - beta * beta / rho1 - gamma1
    m12 = gamma2 - alpha * beta / rho1
    out["determinant_margin"] = m11 * m22 - m12 * m12
    return out


# ============================================================================
# PARTIAL DERIVATIVES OF beta
# ============================================================================

class BetaPartials(BaseModel):
    """Gradient of beta in the traces and in eps_delta."""

    rho_minus: float
    m_minus: float
    rho_plus: float
    m_plus: float
    eps_delta: float

    model_config = ConfigDict(frozen=True)


def beta_partials(s: InterfaceStates, consts: FanConstants, eps_delta: float) -> BetaPartials:
    """
    Closed-form partial derivatives of beta.

    The eps_delta component is the coefficient f = a c / (2 sqrt(S)).
    """
    k = interface_kernel(*s.as_tuple(), consts, eps_delta, partials=True)
    return BetaPartials(
        rho_minus=float(k["d_rho_minus"]),
        m_minus=float(k["d_m_minus"]),
        rho_plus=float(k["d_rho_plus"]),
        m_plus=float(k["d_m_plus"]),
        eps_delta=float(k["f"]),
    )


# ============================================================================
# SWEEPS AND THE RIEMANN SUBSOLUTION
# ============================================================================

class MarginSweep(BaseModel):
    """Smallest margins over the corners of a neighborhood of the baseline."""

    min_admissibility_left: float
    min_admissibility_right: float
    min_eps1: float
    min_eps2: float
    samples: int

    @property
    def passed(self) -> bool:
        return min(
            self.min_admissibility_left,
            self.min_admissibility_right,
            self.min_eps1,
            self.min_eps2,
        ) > 0.0


def margin_sweep(consts: FanConstants, eps_bar: float, delta_hat: float) -> MarginSweep:
    """
    Evaluate every margin on the 16 corners of the delta_hat box around the
    baseline traces, for eps_delta in {-eps_bar, 0, eps_bar}.
    """
    base = InterfaceStates.baseline().as_tuple()
    worst = [math.inf] * 4
    samples = 0

    for signs in itertools.product((-1.0, 1.0), repeat=4):
        values = [b + sgn * delta_hat for b, sgn in zip(base, signs)]
        states = InterfaceStates(
            rho_minus_nu=values[0], m_minus2_nu=values[1], rho_plus_nu=values[2], m_plus2_nu=values[3]
        )
        for eps in (-eps_bar, 0.0, eps_bar):
            sol = solve_interface(states, consts, eps)
            left, right = admissibility_margins(states, consts, sol)
            candidates = (left, right, sol.eps1, min(sol.eps2L, sol.eps2R))
            worst = [min(w, v) for w, v in zip(worst, candidates)]
            samples += 1

    sweep = MarginSweep(
        min_admissibility_left=worst[0],
        min_admissibility_right=worst[1],
        min_eps1=worst[2],
        min_eps2=worst[3],
        samples=samples,
    )
    logger.debug("Margin sweep finished", passed=sweep.passed, samples=samples, minima=worst)
    return sweep


class RiemannSubsolution(BaseModel):
    """Explicit fan subsolution for the baseline Riemann states."""

    rho1: float
    K: float
    nu_minus: float
    nu_plus: float
    beta: float
    eps1: float
    eps2: float

    model_config = ConfigDict(frozen=True)

    @classmethod
    def exact(cls) -> "RiemannSubsolution":
        return cls(
            rho1=2.0,
            K=(58.0 + 2.0 * SQRT13) / 9.0,
            nu_minus=(-SQRT8 - SQRT26) / 3.0,
            nu_plus=(SQRT26 - SQRT32) / 6.0,
            beta=(SQRT32 - SQRT26) / 3.0,
            eps1=(50.0 + 16.0 * SQRT13) / 9.0,
            eps2=1.0,
        )

    def as_interface_solution(self) -> InterfaceSolution:
        C1 = 2 * self.rho1 * self.K - 4 * self.rho1 ** 2
        gamma1 = C1 / 2 - self.eps1 - self.beta ** 2 / self.rho1
        return InterfaceSolution(
            nu_minus=self.nu_minus,
            nu_plus=self.nu_plus,
            beta=self.beta,
            eps2L=self.eps2,
            eps2R=self.eps2,
            eps_delta=0.0,
            eps1_left=self.eps1,
            eps1_right=self.eps1,
            C1=C1,
            gamma1_left=gamma1,
            gamma1_right=gamma1,
        )


def _state_error(state: EulerState, rho: float, m2: float) -> float:
    return max(abs(state.rho - rho), abs(state.m2 - m2))


def verify_riemann_subsolution(
    states: Optional[InterfaceStates] = None,
    consts: Optional[FanConstants] = None,
    zeta2_over_T: float = 0.05,
    lambda_minus: float = SQRT2,
    lambda_plus: float = -2.0 * SQRT2,
    w1: float = 4.0 * SQRT2,
    state_map: Callable[[float, float], EulerState] = state_from_wave,
) -> VerificationReport:
    """
    Check the explicit fan subsolution against the baseline Riemann states.

    Never raises on a failed check; every outcome is a CheckResult.
    """
    states = states or InterfaceStates.baseline()
    consts = consts or FanConstants()
    exact = RiemannSubsolution.exact()
    report = VerificationReport(title="Riemann fan subsolution")

    left_state = state_map(lambda_minus, w1)
    right_state = state_map(lambda_plus, w1)
    mismatch = max(
        _state_error(left_state, states.rho_minus_nu, states.m_minus2_nu),
        _state_error(right_state, states.rho_plus_nu, states.m_plus2_nu),
    )
    report.add("endpoint_states_match", mismatch < 1e-12, mismatch, 1e-12)

    sol = exact.as_interface_solution()
    names = ("left_continuity", "left_momentum", "right_continuity", "right_momentum")
    for name, value in zip(names, rh_residuals(states, consts, sol)):
        report.add(f"rh_residual_{name}", abs(value) < RH_TOLERANCE, abs(value), RH_TOLERANCE)

    left, right = admissibility_margins(states, consts, sol)
    report.add("admissibility_margin_left", left > 0.0, left, 0.0)
    report.add("admissibility_margin_right", right > 0.0, right, 0.0)

    eps1, eps2L, eps2R = subsolution_margins(sol)
    report.add("subsolution_eps1", eps1 > 0.0, eps1, 0.0)
    report.add("subsolution_eps2", min(eps2L, eps2R) > 0.0, min(eps2L, eps2R), 0.0)

    pd = matrix_pd_check(consts.rho1, (0.0, sol.beta), trace_matrix(sol.gamma1), sol.C1)
    report.add("pd_check", pd, float(pd))

    bounds = shock_bounds(lambda_minus, lambda_plus, zeta2_over_T, 1.0)
    gap = min(
        bounds.s_minus_slope - sol.nu_minus,
        bounds.s_plus_slope - bounds.s_minus_slope,
        sol.nu_plus - bounds.s_plus_slope,
    )
    report.add("shock_ordering", gap > 0.0, gap, 0.0)

    try:
        closed = solve_interface(states, consts, 0.0)
        deviation = max(
            abs(closed.nu_minus - exact.nu_minus),
            abs(closed.nu_plus - exact.nu_plus),
            abs(closed.beta - exact.beta),
            abs(closed.eps2L - exact.eps2),
            abs(closed.eps1 - exact.eps1),
        )
    except RadicandError as exc:
        logger.error("Closed-form branch unavailable", error=str(exc))
        deviation = math.inf
    report.add("closed_form_matches_constants", deviation < 1e-12, deviation, 1e-12)

    R, A, H, B = rab_quantities(states)
    report.quantities.update(
        {
            "R": R, "A": A, "H": H, "B": B,
            "nu_minus": sol.nu_minus, "nu_plus": sol.nu_plus, "beta": sol.beta,
            "eps1": eps1, "eps2": eps2L, "C1": sol.C1, "gamma1": sol.gamma1,
            "rho1": consts.rho1, "K": consts.K,
            "admissibility_left": left, "admissibility_right": right,
            "s_minus_slope": bounds.s_minus_slope, "s_plus_slope": bounds.s_plus_slope,
            "energy_left": energy_density(left_state), "energy_right": energy_density(right_state),
        }
    )

    if report.passed:
        logger.info("Riemann subsolution verified", checks=len(report.checks))
    else:
        logger.error("Riemann subsolution checks failed", failures=report.failures())
    return report
