"""
Boundary traces and the eps_delta equation of the fan.

The outer smooth solution is prescribed on the fan boundaries through its
characteristic speed: on (0, delta) the left trace is a_- f0(t) + lambda_-
- zeta2/T and the right trace -a_+ f0(t) + lambda_+ + zeta2/T; a quintic
bridge joins them to the plateaus lambda_+- on [delta, delta'].

Along the fan, beta(t) = beta(traces(t), eps_delta(t)) has to satisfy

    d beta / dt = -eps_delta / l,   l(t) = nu~_+(t) - nu~_-(t),

i.e. f * eps' + eps / l + g = 0 with f = d beta / d eps_delta and g the
time derivative of beta at fixed eps_delta. The solver iterates the integral
form of this equation on a logarithmic grid, where the kernel 1/(t |log t|)
becomes smooth.

Philosophy:
- Every coefficient is analytic; finite differences only cross-check
- The whole grid is evaluated at once through the vectorized interface kernel
- Diagnostics are reported, not raised
"""

import math
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator
from scipy.integrate import cumulative_trapezoid, quad

from src.core.config import ScenarioConfig
from src.core.euler_map import (
    density_from_speed,
    density_speed_derivative,
    momentum_from_speed,
    momentum_speed_derivative,
    state_from_wave,
)
from src.core.exceptions import ContractionError, DomainError, GeometryError, RadicandError
from src.core.models import (
    FanConstants,
    InterfaceStates,
    Side,
    TraceShape,
    VerificationReport,
)
from src.core.profiles import BridgePiece, f0_array, f0_first_array, f0_second_array, quintic_bridge
from src.core.subsolution import (
    admissibility_kernel,
    epsilon1_from_K,
    interface_kernel,
    margin_sweep,
)
from src.utils.logger import get_logger

logger = get_logger()

# Baseline R = -3, A = sqrt8, B = -13 of the Riemann traces
R_BAR = -3.0
A_BAR = math.sqrt(8.0)
B_BAR = -13.0
BALL_RADIUS = abs(B_BAR) / (2.0 * abs(R_BAR))

# eps_delta at the smallest grid time must already be this small
EPS_ORIGIN_BOUND = 1e-2

# Observed order a refinement study has to reach; the scheme is second order
MIN_REFINEMENT_ORDER = 1.5


# ============================================================================
# BOUNDARY TRACES
# ============================================================================

class TraceSpec(BaseModel):
    """Prescribed characteristic speeds on the two fan boundaries."""

    lambda_minus: float = math.sqrt(2.0)
    lambda_plus: float = -2.0 * math.sqrt(2.0)
    w1: float = 4.0 * math.sqrt(2.0)
    zeta2_over_T: float = Field(default=0.05, gt=0.0)
    delta: float = Field(default=0.02, gt=0.0)
    delta_prime: float = Field(default=0.05, gt=0.0, lt=1.0)
    amplitude_minus: float = Field(default=0.05, ge=0.0)
    amplitude_plus: float = Field(default=0.05, ge=0.0)
    shape: TraceShape = TraceShape.COMPRESSION

    _bridges: Dict[Side, BridgePiece] = PrivateAttr(default_factory=dict)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def window(self) -> "TraceSpec":
        if not self.delta < self.delta_prime:
            raise ValueError(f"delta must be smaller than delta_prime, got {self.delta} >= {self.delta_prime}")
        if self.shape == TraceShape.COMPRESSION:
            reach = float(f0_array(self.delta))
            for name, amp in (("amplitude_minus", self.amplitude_minus), ("amplitude_plus", self.amplitude_plus)):
                if not amp * reach < self.zeta2_over_T:
                    raise ValueError(
                        f"{name}*f0(delta) = {amp * reach:.6g} must stay below zeta2/T = {self.zeta2_over_T}"
                    )
        return self

    @classmethod
    def from_config(cls, cfg: ScenarioConfig, shape: TraceShape = TraceShape.COMPRESSION) -> "TraceSpec":
        return cls(
            lambda_minus=cfg.lambda_minus,
            lambda_plus=cfg.lambda_plus,
            w1=cfg.w1,
            zeta2_over_T=cfg.zeta2_over_T,
            delta=cfg.delta,
            delta_prime=cfg.delta_prime,
            amplitude_minus=cfg.a_minus,
            amplitude_plus=cfg.a_plus,
            shape=shape,
        )

    def inner_base(self, side: Side) -> float:
        """Trace value at t = 0+."""
        if self.shape == TraceShape.PLATEAU:
            return self.plateau(side)
        if side == Side.LEFT:
            return self.lambda_minus - self.zeta2_over_T
        return self.lambda_plus + self.zeta2_over_T

    def plateau(self, side: Side) -> float:
        return self.lambda_minus if side == Side.LEFT else self.lambda_plus

    def direction(self, side: Side) -> float:
        return 1.0 if side == Side.LEFT else -1.0

    def amplitude(self, side: Side) -> float:
        return self.amplitude_minus if side == Side.LEFT else self.amplitude_plus

    def bridge(self, side: Side) -> BridgePiece:
        """Quintic joining the inner trace at delta to the plateau at delta'."""
        if side in self._bridges:
            return self._bridges[side]
        sign = self.direction(side) * self.amplitude(side)
        d = self.delta
        start = (
            self.inner_base(side) + sign * float(f0_array(d)),
            sign * float(f0_first_array(d)),
            sign * float(f0_second_array(d)),
        )
        end = (self.plateau(side), 0.0, 0.0)
        self._bridges[side] = quintic_bridge(d, self.delta_prime, start, end, side)
        return self._bridges[side]


def trace_speed(t, spec: TraceSpec, side: Side, order: int = 0):
    """
    lambda_{1,side}^nu(t) (order 0) or its first/second time derivative.

    Vectorized in t; t must be positive.

    Raises:
        DomainError: t <= 0 or order outside {0, 1, 2}
    """
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(arr <= 0.0):
        raise DomainError("boundary traces are defined for t > 0")
    if order not in (0, 1, 2):
        raise DomainError(f"trace derivative order must be 0, 1 or 2, got {order}")

    if spec.shape == TraceShape.PLATEAU:
        out = np.full(arr.shape, spec.plateau(side) if order == 0 else 0.0)
        return out if np.ndim(t) else float(out[0])

    sign = spec.direction(side) * spec.amplitude(side)
    inner = arr < spec.delta
    middle = (arr >= spec.delta) & (arr < spec.delta_prime)
    out = np.full(arr.shape, spec.plateau(side) if order == 0 else 0.0)

    kernels = (f0_array, f0_first_array, f0_second_array)
    out[inner] = sign * kernels[order](arr[inner])
    if order == 0:
        out[inner] += spec.inner_base(side)

    if np.any(middle):
        piece = spec.bridge(side)
        methods = (piece.speed, piece.speed_dp, piece.speed_dpp)
        out[middle] = methods[order](arr[middle])

    return out if np.ndim(t) else float(out[0])


def boundary_traces(t: float, spec: TraceSpec) -> InterfaceStates:
    """
    Outer traces (rho, m2) on both fan boundaries at time t.

    Raises:
        DomainError: t <= 0
    """
    if not t > 0.0:
        raise DomainError(f"boundary traces are defined for t > 0, got t={t}")
    left = state_from_wave(trace_speed(t, spec, Side.LEFT), spec.w1)
    right = state_from_wave(trace_speed(t, spec, Side.RIGHT), spec.w1)
    return InterfaceStates(
        rho_minus_nu=left.rho, m_minus2_nu=left.m2, rho_plus_nu=right.rho, m_plus2_nu=right.m2
    )


def trace_state_arrays(t: np.ndarray, spec: TraceSpec) -> Tuple[np.ndarray, ...]:
    """Vectorized (rho_-, m_-, rho_+, m_+) along the boundaries."""
    lam_m = trace_speed(t, spec, Side.LEFT)
    lam_p = trace_speed(t, spec, Side.RIGHT)
    return (
        density_from_speed(lam_m, spec.w1),
        momentum_from_speed(lam_m, spec.w1),
        density_from_speed(lam_p, spec.w1),
        momentum_from_speed(lam_p, spec.w1),
    )


def trace_states_derivative(t, spec: TraceSpec) -> Tuple[np.ndarray, ...]:
    """Time derivatives (d rho_-, d m_-, d rho_+, d m_+) of the traces."""
    out = []
    for side in (Side.LEFT, Side.RIGHT):
        lam = trace_speed(t, spec, side)
        dlam = trace_speed(t, spec, side, order=1)
        out.append(density_speed_derivative(lam, spec.w1) * dlam)
        out.append(momentum_speed_derivative(lam, spec.w1) * dlam)
    return tuple(out)


def check_traces(spec: TraceSpec, consts: FanConstants, samples: int = 2049) -> None:
    """
    Verify the traces keep a real interface branch over (0, delta'].

    Raises:
        GeometryError: a bridge is not strictly monotone or the density
            ordering rho_- < rho1 < rho_+ fails somewhere
    """
    if spec.shape == TraceShape.COMPRESSION:
        spec.bridge(Side.LEFT)
        spec.bridge(Side.RIGHT)
    t = np.geomspace(1e-12, spec.delta_prime, samples)
    rm, _, rp, _ = trace_state_arrays(t, spec)
    if np.max(rm) >= consts.rho1 or np.min(rp) <= consts.rho1:
        raise GeometryError(
            f"trace densities leave the admissible ordering: max rho_-={np.max(rm):.6g}, "
            f"min rho_+={np.min(rp):.6g}, rho1={consts.rho1}"
        )


# ============================================================================
# COEFFICIENTS
# ============================================================================

def _kernel_at(t, eps_delta, spec: TraceSpec, consts: FanConstants, partials: bool = False):
    return interface_kernel(*trace_state_arrays(t, spec), consts, eps_delta, partials=partials)


def coeff_f(t: float, eps_delta: float, spec: TraceSpec, consts: FanConstants) -> float:
    """f = d beta / d eps_delta = a c / (2 sqrt((-B + R eps) a c))."""
    return float(_kernel_at(t, eps_delta, spec, consts)["f"])


def coeff_g(t: float, eps_delta: float, spec: TraceSpec, consts: FanConstants) -> float:
    """
    g = d beta / dt at fixed eps_delta, by the chain rule through the traces.

    Raises:
        DomainError: t <= 0
    """
    if not t > 0.0:
        raise DomainError(f"g is defined for t > 0, got t={t}")
    k = _kernel_at(t, eps_delta, spec, consts, partials=True)
    drm, dmm, drp, dmp = trace_states_derivative(t, spec)
    return float(
        k["d_rho_minus"] * drm + k["d_m_minus"] * dmm + k["d_rho_plus"] * drp + k["d_m_plus"] * dmp
    )


def coeff_g_fd(
    t: float, eps_delta: float, spec: TraceSpec, consts: FanConstants, h: Optional[float] = None
) -> float:
    """Central-difference estimate of g."""
    step = h or 1e-6 * t
    forward = float(_kernel_at(t + step, eps_delta, spec, consts)["beta"])
    backward = float(_kernel_at(t - step, eps_delta, spec, consts)["beta"])
    return (forward - backward) / (2.0 * step)


def length_l(
    t: float,
    eps_delta_path: Optional[Callable[[float], float]],
    spec: TraceSpec,
    consts: FanConstants,
) -> float:
    """
    Fan width l(t) = integral over (0, t) of nu_+ - nu_-.

    Args:
        eps_delta_path: eps_delta as a function of time; None means 0

    Raises:
        DomainError: t <= 0
    """
    if not t > 0.0:
        raise DomainError(f"fan width is defined for t > 0, got t={t}")
    path = eps_delta_path or (lambda s: 0.0)

    def rate(s: float) -> float:
        return float(_kernel_at(s, path(s), spec, consts)["width_rate"])

    breaks = [b for b in (spec.delta, spec.delta_prime) if b < t]
    value, _ = quad(rate, 0.0, t, points=breaks or None, limit=200, epsabs=1e-13, epsrel=1e-11)
    return value


# ============================================================================
# PICARD ITERATION
# ============================================================================

class PicardProblem(BaseModel):
    """Grid and frozen trace data for the fixed-point map."""

    spec: TraceSpec
    consts: FanConstants
    u: np.ndarray
    t: np.ndarray
    states: Tuple[np.ndarray, ...]
    rates: Tuple[np.ndarray, ...]

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @classmethod
    def build(
        cls,
        spec: TraceSpec,
        consts: FanConstants,
        T_end: float,
        grid_size: int,
        t_min: float,
    ) -> "PicardProblem":
        if not 0.0 < t_min < T_end:
            raise DomainError(f"need 0 < t_min < T_end, got t_min={t_min}, T_end={T_end}")
        if T_end > min(spec.delta_prime, 0.5):
            raise DomainError(f"T_end={T_end} exceeds min(delta_prime, 1/2)")
        if grid_size < 16:
            raise DomainError(f"grid_size must be at least 16, got {grid_size}")

        u = np.linspace(math.log(t_min), math.log(T_end), grid_size)
        t = np.exp(u)
        t[0], t[-1] = t_min, T_end
        return cls(
            spec=spec,
            consts=consts,
            u=u,
            t=t,
            states=trace_state_arrays(t, spec),
            rates=trace_states_derivative(t, spec),
        )

    def coefficients(self, eps: np.ndarray):
        """Kernel output on the grid plus g."""
        k = interface_kernel(*self.states, self.consts, eps, partials=True)
        drm, dmm, drp, dmp = self.rates
        k["g"] = k["d_rho_minus"] * drm + k["d_m_minus"] * dmm + k["d_rho_plus"] * drp + k["d_m_plus"] * dmp
        k["length"] = self.t[0] * k["width_rate"][0] + cumulative_trapezoid(
            k["width_rate"] * self.t, self.u, initial=0.0
        )
        return k

    def apply(self, eps: np.ndarray) -> np.ndarray:
        """One application of the integral map."""
        k = self.coefficients(eps)
        t, u = self.t, self.u
        f, g, length = k["f"], k["g"], k["length"]

        kernel_rate = 1.0 / (length * f)
        Lam = cumulative_trapezoid(kernel_rate * t, u, initial=0.0)
        shift = Lam - Lam[-1]
        # quasi-static value -g*l carries the integral over (0, t_min)
        head = -g[0] * length[0]
        forcing = cumulative_trapezoid((g / f) * t * np.exp(shift), u, initial=0.0)
        return np.exp(-shift) * (head * math.exp(-Lam[-1]) - forcing)

    def step_residual(self, eps: np.ndarray) -> np.ndarray:
        """
        Residual of t f eps' + t eps / l + t g = 0 on each grid interval.

        Written in the difference form of ``apply``: with a = t/(l f),
        b = t g/f and dL the trapezoid increment of a over the interval,

            f_mid * ((eps[i+1] e^dL - eps[i]) / du + (b[i] + b[i+1] e^dL) / 2),

        which vanishes exactly on a fixed point of the map.
        """
        k = self.coefficients(eps)
        t, u = self.t, self.u
        f, g, length = k["f"], k["g"], k["length"]
        a = t / (length * f)
        b = t * g / f
        du = np.diff(u)
        growth = np.exp(0.5 * du * (a[:-1] + a[1:]))
        difference = (eps[1:] * growth - eps[:-1]) / du + 0.5 * (b[:-1] + b[1:] * growth)
        return 0.5 * (f[:-1] + f[1:]) * difference


class EpsDeltaSolution(BaseModel):
    """eps_delta on a logarithmic grid with the fan quantities it induces."""

    grid: List[float]
    values: List[float]
    iterations: int = Field(ge=1)
    sup_distances: List[float]
    nu_minus: List[float]
    nu_plus: List[float]
    beta: List[float]
    eps2L: List[float]
    eps2R: List[float]
    eps1: List[float]
    length: List[float]
    margin_left: List[float]
    margin_right: List[float]

    @property
    def t_min(self) -> float:
        return self.grid[0]

    @property
    def contraction_ratios(self) -> List[float]:
        d = self.sup_distances
        return [d[i] / d[i - 1] for i in range(1, len(d)) if d[i - 1] > 0.0]

    def __call__(self, t):
        """eps_delta at t; 0 below the grid, last value beyond it."""
        arr = np.asarray(t, dtype=float)
        grid = np.asarray(self.grid)
        with np.errstate(divide="ignore"):
            out = np.interp(np.log(np.maximum(arr, 1e-300)), np.log(grid), np.asarray(self.values))
        out = np.where(arr < grid[0], 0.0, out)
        return out if out.ndim else float(out)

    def bound_constant(self) -> float:
        """sup |eps_delta(t)| sqrt|log t| over the grid."""
        t = np.asarray(self.grid)
        return float(np.max(np.abs(self.values) * np.sqrt(np.abs(np.log(t)))))

    def table(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "t": self.grid,
                "eps_delta": self.values,
                "nu_minus": self.nu_minus,
                "nu_plus": self.nu_plus,
                "beta": self.beta,
                "eps2L": self.eps2L,
                "eps2R": self.eps2R,
                "margin_left": self.margin_left,
                "margin_right": self.margin_right,
            }
        )


def picard_solve(
    spec: TraceSpec,
    consts: FanConstants,
    T_end: float,
    grid_size: int,
    tol: float,
    t_min: float = 1e-8,
    max_iterations: int = 50,
) -> EpsDeltaSolution:
    """
    Solve f eps' + eps/l + g = 0 by Picard iteration from eps = 0.

    Stops once the sup-distance between iterates drops below ``tol``.

    Raises:
        DomainError: T_end > min(delta', 1/2), t_min >= T_end or tol <= 0
        ContractionError: three consecutive non-contracting steps, or no
            convergence within max_iterations
        RadicandError: an iterate leaves the range of the closed-form branch
    """
    if not tol > 0.0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    problem = PicardProblem.build(spec, consts, T_end, grid_size, t_min)

    eps = np.zeros_like(problem.t)
    distances: List[float] = []
    streak = 0
    for iteration in range(1, max_iterations + 1):
        new = problem.apply(eps)
        distance = float(np.max(np.abs(new - eps)))
        distances.append(distance)
        eps = new
        logger.debug("Picard step", iteration=iteration, sup_distance=distance)
        if distance < tol:
            break
        if len(distances) > 1 and distance >= distances[-2]:
            streak += 1
            if streak >= 3:
                raise ContractionError(
                    f"Picard map is not contracting: distances {distances[-4:]}"
                )
        else:
            streak = 0
    else:
        raise ContractionError(
            f"no convergence within {max_iterations} iterations (last distance {distances[-1]:.3g})"
        )

    solution = _assemble(problem, eps, iteration, distances)
    logger.info(
        "Picard iteration converged",
        iterations=iteration,
        final_distance=distances[-1],
        grid_size=grid_size,
        bound_constant=solution.bound_constant(),
    )
    return solution


def _assemble(problem: PicardProblem, eps: np.ndarray, iterations: int, distances: List[float]) -> EpsDeltaSolution:
    k = problem.coefficients(eps)
    consts = problem.consts
    eps2L = k["eps2L"]
    eps2R = eps2L - eps
    eps1 = np.minimum(
        epsilon1_from_K(consts.rho1, k["beta"], eps2L, consts.K),
        epsilon1_from_K(consts.rho1, k["beta"], eps2R, consts.K),
    )
    left, right = admissibility_kernel(*problem.states, consts, k["beta"], k["nu_minus"], k["nu_plus"])
    return EpsDeltaSolution(
        grid=problem.t.tolist(),
        values=eps.tolist(),
        iterations=iterations,
        sup_distances=distances,
        nu_minus=k["nu_minus"].tolist(),
        nu_plus=k["nu_plus"].tolist(),
        beta=k["beta"].tolist(),
        eps2L=eps2L.tolist(),
        eps2R=eps2R.tolist(),
        eps1=eps1.tolist(),
        length=k["length"].tolist(),
        margin_left=np.asarray(left).tolist(),
        margin_right=np.asarray(right).tolist(),
    )


# ============================================================================
# DIAGNOSTICS
# ============================================================================

def margin_horizon(solution: EpsDeltaSolution) -> float:
    """Largest grid time delta0 with every margin positive on (0, delta0]."""
    worst = np.minimum.reduce(
        [
            np.asarray(solution.margin_left),
            np.asarray(solution.margin_right),
            np.asarray(solution.eps1),
            np.asarray(solution.eps2L),
            np.asarray(solution.eps2R),
        ]
    )
    bad = np.nonzero(worst <= 0.0)[0]
    if len(bad) == 0:
        return solution.grid[-1]
    if bad[0] == 0:
        return 0.0
    return solution.grid[bad[0] - 1]


def _contracts(
    spec: TraceSpec,
    consts: FanConstants,
    T_end: float,
    grid_size: int,
    tol: float,
    t_min: float,
    max_iterations: int,
) -> bool:
    try:
        solution = picard_solve(
            spec, consts, T_end, grid_size, tol, t_min=t_min, max_iterations=max_iterations
        )
    except (ContractionError, RadicandError) as exc:
        logger.debug("No contraction", T_end=T_end, reason=str(exc))
        return False
    ratios = solution.contraction_ratios[1:]
    return not ratios or max(ratios) < 1.0


def contraction_horizon(
    spec: TraceSpec,
    consts: FanConstants,
    grid_size: int,
    tol: float,
    t_min: float = 1e-8,
    max_iterations: int = 50,
    steps: int = 12,
) -> float:
    """
    Largest T_end <= min(delta', 1/2) at which the Picard map measurably
    contracts (every ratio from the second step on below 1).

    Bisection over T_end; returns 0.0 when no tested T_end contracts.
    """
    hi = min(spec.delta_prime, 0.5)
    if _contracts(spec, consts, hi, grid_size, tol, t_min, max_iterations):
        return hi
    lo = 0.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if mid <= t_min:
            break
        if _contracts(spec, consts, mid, grid_size, tol, t_min, max_iterations):
            lo = mid
        else:
            hi = mid
    logger.info("Contraction horizon bracketed", lower=lo, upper=hi)
    return lo


class RefinementStudy(BaseModel):
    """Three nested solves and what they say about the discretisation error."""

    grid_sizes: List[int]
    sup_differences: List[float]
    observed_order: float
    error_estimate: float
    bound_constants: List[float]

    @property
    def bound_constant_drift(self) -> float:
        """Relative change of the fitted bound constant from coarse to fine."""
        return abs(self.bound_constants[1] / self.bound_constants[0] - 1.0)


def refinement_study(
    spec: TraceSpec,
    consts: FanConstants,
    T_end: float,
    grid_size: int,
    tol: float,
    refine: int = 2,
    t_min: float = 1e-8,
    max_iterations: int = 50,
    fine: Optional[EpsDeltaSolution] = None,
) -> RefinementStudy:
    """
    Solve on nested grids of n, (n-1)N + 1 and (n-1)N^2 + 1 points.

    Both sup-differences are taken on the coarse nodes. With d1 (fine vs
    coarse) and d2 (finest vs fine) the observed order is log(d1/d2)/log N
    and the error of the fine solve is estimated as d2 / (1 - N^-p).

    Args:
        fine: an existing solve on the middle grid, reused if given

    Raises:
        DomainError: refine < 2
    """
    if refine < 2:
        raise DomainError(f"a refinement study needs refine >= 2, got {refine}")
    sizes = [grid_size, (grid_size - 1) * refine + 1, (grid_size - 1) * refine ** 2 + 1]
    solutions = []
    for size in sizes:
        if fine is not None and size == sizes[1] and len(fine.grid) == size:
            solutions.append(fine)
            continue
        solutions.append(
            picard_solve(spec, consts, T_end, size, tol, t_min=t_min, max_iterations=max_iterations)
        )

    coarse_values = np.asarray(solutions[0].values)
    fine_values = np.asarray(solutions[1].values)[::refine]
    finest_values = np.asarray(solutions[2].values)[:: refine ** 2]
    d1 = float(np.max(np.abs(fine_values - coarse_values)))
    d2 = float(np.max(np.abs(finest_values - fine_values)))

    if d2 == 0.0:
        order = math.inf
        error = 0.0
    else:
        order = math.log(d1 / d2) / math.log(refine) if d1 > 0.0 else -math.inf
        error = d2 / (1.0 - refine ** -order) if order > 0.0 else math.inf

    study = RefinementStudy(
        grid_sizes=sizes,
        sup_differences=[d1, d2],
        observed_order=order,
        error_estimate=error,
        bound_constants=[s.bound_constant() for s in solutions],
    )
    logger.info(
        "Refinement study finished",
        grid_sizes=sizes,
        sup_differences=study.sup_differences,
        observed_order=order,
        error_estimate=error,
    )
    return study


def fan_diagnostics(
    solution: EpsDeltaSolution,
    spec: TraceSpec,
    consts: FanConstants,
    tol: float,
    eps_bar: float = 0.1,
    delta_hat: float = 0.01,
    strict: bool = False,
) -> VerificationReport:
    """
    Checks on a Picard solution: contraction, fixed-point and ODE residuals,
    the invariant ball, margins and the fan-width band.
    """
    report = VerificationReport(title="Fan solution diagnostics")
    t = np.asarray(solution.grid)
    eps = np.asarray(solution.values)
    problem = PicardProblem.build(spec, consts, float(t[-1]), len(t), float(t[0]))

    ratios = solution.contraction_ratios[1:]
    worst_ratio = max(ratios) if ratios else 0.0
    report.add("contraction", worst_ratio < 1.0, worst_ratio, 1.0)

    fixed_point = float(np.max(np.abs(problem.apply(eps) - eps)))
    report.add("fixed_point_residual", fixed_point < 10 * tol, fixed_point, 10 * tol)

    k = problem.coefficients(eps)
    ode_residual = float(np.max(np.abs(problem.step_residual(eps))))
    report.add("ode_residual", ode_residual < 10 * tol, ode_residual, 10 * tol)

    sup_eps = float(np.max(np.abs(eps)))
    report.add("ball_invariance", sup_eps < BALL_RADIUS, sup_eps, BALL_RADIUS)

    eps_origin = abs(float(eps[0]))
    report.add("eps_at_t_min", eps_origin < EPS_ORIGIN_BOUND, eps_origin, EPS_ORIGIN_BOUND)

    horizon = margin_horizon(solution)
    report.add("margins_positive", horizon >= t[-1], horizon, float(t[-1]))

    width = np.asarray(solution.length) / t
    band = (float(np.min(width)), float(np.max(width)))
    report.add("length_band", band[0] > 2.0 and band[1] < 3.0, band[1], 3.0, detail=f"min={band[0]:.17g}")

    rm, mm, rp, mp = problem.states
    R = rm - rp
    A = mm - mp
    H = mm * mm / rm - mp * mp / rp + rm * rm - rp * rp
    B = A * A - R * H
    closeness = float(max(np.max(np.abs(R - R_BAR)), np.max(np.abs(A - A_BAR)), np.max(np.abs(B - B_BAR))))
    if closeness >= delta_hat:
        logger.warning("Traces leave the delta_hat neighborhood", distance=closeness, delta_hat=delta_hat)

    sweep = margin_sweep(consts, eps_bar, delta_hat)
    if strict:
        report.add("margin_sweep", sweep.passed, min(
            sweep.min_admissibility_left, sweep.min_admissibility_right, sweep.min_eps1, sweep.min_eps2
        ), 0.0)
    elif not sweep.passed:
        logger.warning("Margin sweep found a non-positive margin", sweep=sweep.model_dump())

    report.quantities.update(
        {
            "iterations": float(solution.iterations),
            "max_contraction_ratio": worst_ratio,
            "bound_constant": solution.bound_constant(),
            "eps_at_t_min": float(eps[0]),
            "sup_eps_delta": sup_eps,
            "delta0": horizon,
            "length_rate_min": band[0],
            "length_rate_max": band[1],
            "f_min": float(np.min(k["f"])),
            "f_max": float(np.max(k["f"])),
            "delta_hat_distance": closeness,
            "sweep_min_admissibility_left": sweep.min_admissibility_left,
            "sweep_min_admissibility_right": sweep.min_admissibility_right,
            "sweep_min_eps1": sweep.min_eps1,
            "sweep_min_eps2": sweep.min_eps2,
        }
    )
    return report
