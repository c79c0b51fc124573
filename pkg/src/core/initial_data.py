"""
Reconstruction of the wild initial datum from the fan.

Given the boundary traces and the solved eps_delta, the fan curves
nu~_+-(s) = integral of nu_+- over (0, s) are known. Each point x2 near the
origin is then traced along its Burgers characteristic to the time h(x2)
at which it hits the fan boundary:

    nu~(h) = x2 + h * lambda^nu(h).

The datum at the collapse time is lambda^nu(h(x2)); behind the collapse the
same characteristics, together with the focusing fan, give a smooth
compression wave whose value at t = 0 is the wild initial datum.

Times: the smooth datum lives at t = 0, the collapse at t = T and the fan
clock s starts at the collapse, so a fan point at s sits at t = T + s.

Philosophy:
- Characteristics, not meshes: every datum value is one bracketed root solve
- The fan curves are splines of nu~/t in log time, exact at the grid points
- Hypotheses on h are measured and reported, never assumed
"""

import math
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from src.core.burgers import CharSolution, eval_dx, eval_solution, shock_bounds
from src.core.euler_map import density_from_speed, momentum_from_speed, state_from_wave
from src.core.exceptions import DomainError, GeometryError
from src.core.models import (
    CheckResult,
    EulerState,
    FanConstants,
    ProfileMode,
    ShockBounds,
    Side,
    TraceShape,
    VerificationReport,
)
from src.core.ode_epsilon import EpsDeltaSolution, TraceSpec, trace_speed
from src.core.profiles import (
    CharacteristicPiece,
    ConstantPiece,
    LambdaProfile,
    LinearPiece,
)
from src.core.subsolution import interface_kernel
from src.utils.logger import get_logger
from src.utils.roots import solve_bracketed

logger = get_logger()

# Fit slope above which |h''| |x| is taken to outgrow every polylog envelope
ENVELOPE_SLOPE_LIMIT = 0.1


# ============================================================================
# FAN CURVES
# ============================================================================

class FanCurve(BaseModel):
    """
    One fan boundary nu~(s), s >= 0.

    Stored as the grid and the interface speeds on it; evaluated through a
    cubic spline of phi = nu~/s in u = log s. Below the grid phi is frozen at
    its first value and beyond it the curve continues with its end speed.
    """

    side: Side
    grid: List[float]
    speeds: List[float]

    _u: np.ndarray = PrivateAttr(default=None)
    _phi: CubicSpline = PrivateAttr(default=None)
    _end: Tuple[float, float, float] = PrivateAttr(default=(0.0, 0.0, 0.0))

    def model_post_init(self, __context) -> None:
        t = np.asarray(self.grid)
        nu = np.asarray(self.speeds)
        self._u = np.log(t)
        positions = t[0] * nu[0] + cumulative_trapezoid(nu * t, self._u, initial=0.0)
        self._phi = CubicSpline(self._u, positions / t)
        end_speed = float(self._phi(self._u[-1]) + self._phi(self._u[-1], 1))
        self._end = (float(t[-1]), float(positions[-1]), end_speed)

    def _split(self, s):
        arr = np.atleast_1d(np.asarray(s, dtype=float))
        if np.any(arr < 0.0):
            raise DomainError("fan curves are defined for s >= 0")
        low = arr < self.grid[0]
        high = arr > self._end[0]
        mid = ~(low | high)
        return arr, low, mid, high

    @staticmethod
    def _shape(s, out):
        return out if np.ndim(s) else float(out[0])

    def position(self, s):
        arr, low, mid, high = self._split(s)
        out = np.empty(arr.shape)
        out[low] = arr[low] * float(self._phi(self._u[0]))
        out[mid] = arr[mid] * self._phi(np.log(arr[mid]))
        t_end, x_end, v_end = self._end
        out[high] = x_end + (arr[high] - t_end) * v_end
        return self._shape(s, out)

    def speed(self, s):
        arr, low, mid, high = self._split(s)
        out = np.empty(arr.shape)
        out[low] = float(self._phi(self._u[0]))
        u = np.log(arr[mid])
        out[mid] = self._phi(u) + self._phi(u, 1)
        out[high] = self._end[2]
        return self._shape(s, out)

    def acceleration(self, s):
        arr, low, mid, high = self._split(s)
        out = np.zeros(arr.shape)
        u = np.log(arr[mid])
        out[mid] = (self._phi(u, 1) + self._phi(u, 2)) / arr[mid]
        return self._shape(s, out)


class FanPartition(BaseModel):
    """The two fan boundaries of the generalized fan partition."""

    left: FanCurve
    right: FanCurve
    T_end: float = Field(gt=0.0)

    def positions(self, s) -> Tuple[float, float]:
        return self.left.position(s), self.right.position(s)

    def width(self, s):
        return self.right.position(s) - self.left.position(s)

    def curve(self, side: Side) -> FanCurve:
        return self.left if side == Side.LEFT else self.right

    def sandwich(self, bounds: ShockBounds, times: Optional[Sequence[float]] = None) -> CheckResult:
        """nu~_- < s_- t and nu~_+ > s_+ t at every sampled time."""
        t = np.asarray(times if times is not None else self.left.grid, dtype=float)
        gap_left = bounds.s_minus_slope * t - self.left.position(t)
        gap_right = self.right.position(t) - bounds.s_plus_slope * t
        worst = float(min(np.min(gap_left), np.min(gap_right)))
        return CheckResult(name="fan_sandwich", passed=worst > 0.0, value=worst, threshold=0.0)

    def table(self, times: Sequence[float], bounds: ShockBounds) -> pd.DataFrame:
        t = np.asarray(times, dtype=float)
        return pd.DataFrame(
            {
                "t": t,
                "nu_tilde_minus": self.left.position(t),
                "nu_tilde_plus": self.right.position(t),
                "s_minus": bounds.s_minus_slope * t,
                "s_plus": bounds.s_plus_slope * t,
            }
        )


def fan_curves(eps_solution: EpsDeltaSolution, spec: TraceSpec, consts: FanConstants) -> FanPartition:
    """
    Integrate the interface speeds of a solved fan into its boundary curves.

    Raises:
        GeometryError: the curves do not enclose the shock cone
    """
    fan = FanPartition(
        left=FanCurve(side=Side.LEFT, grid=eps_solution.grid, speeds=eps_solution.nu_minus),
        right=FanCurve(side=Side.RIGHT, grid=eps_solution.grid, speeds=eps_solution.nu_plus),
        T_end=eps_solution.grid[-1],
    )
    bounds = shock_bounds(spec.lambda_minus, spec.lambda_plus, spec.zeta2_over_T, 1.0)
    check = fan.sandwich(bounds)
    if not check.passed:
        raise GeometryError(f"fan curves do not enclose the shock cone (gap {check.value:.6g})")

    logger.debug(
        "Fan curves built",
        T_end=fan.T_end,
        nu_tilde_minus_end=float(fan.left.position(fan.T_end)),
        nu_tilde_plus_end=float(fan.right.position(fan.T_end)),
    )
    return fan


# ============================================================================
# PULLBACK PIECES
# ============================================================================

class PullbackPiece(CharacteristicPiece):
    """
    Characteristics that reach a fan boundary at fan time h in [0, h_max].

    position(t, h) = nu~(h) + (t - anchor - h) * lambda^nu(h), so the
    parameter is the arrival time on the boundary.
    """

    kind: Literal["pullback"] = "pullback"
    curve: FanCurve
    spec: TraceSpec
    h_max: float = Field(gt=0.0)

    def _limit(self, order: int) -> float:
        if order == 0:
            return self.spec.inner_base(self.side)
        if self.spec.shape == TraceShape.PLATEAU or self.spec.amplitude(self.side) == 0.0:
            return 0.0
        sign = self.spec.direction(self.side)
        return sign * math.inf if order == 1 else -sign * math.inf

    def _trace(self, h, order: int = 0):
        arr = np.atleast_1d(np.asarray(h, dtype=float))
        out = np.empty(arr.shape)
        positive = arr > 0.0
        if np.any(positive):
            out[positive] = trace_speed(arr[positive], self.spec, self.side, order)
        out[~positive] = self._limit(order)
        return out if np.ndim(h) else float(out[0])

    def bounds(self) -> Tuple[float, float]:
        return (0.0, self.h_max)

    @property
    def left_param(self) -> float:
        return self.h_max if self.side == Side.LEFT else 0.0

    @property
    def right_param(self) -> float:
        return 0.0 if self.side == Side.LEFT else self.h_max

    def speed(self, p):
        return self._trace(p)

    def speed_dp(self, p):
        return self._trace(p, 1)

    def speed_dpp(self, p):
        return self._trace(p, 2)

    def position(self, t: float, p):
        return self.curve.position(p) + (t - self.anchor - p) * self._trace(p)

    def position_dp(self, t: float, p):
        with np.errstate(invalid="ignore"):
            return self.curve.speed(p) - self._trace(p) + (t - self.anchor - p) * self._trace(p, 1)

    def position_dpp(self, t: float, p):
        with np.errstate(invalid="ignore"):
            return (
                self.curve.acceleration(p)
                - 2.0 * self._trace(p, 1)
                + (t - self.anchor - p) * self._trace(p, 2)
            )

    def anchor_interval(self) -> Tuple[float, float]:
        a = float(self.position(self.anchor, self.left_param))
        b = float(self.position(self.anchor, self.right_param))
        return (a, b)

    def value_at_anchor(self, y: float) -> float:
        return float(self.speed(self.invert(self.anchor, y)))

    def sample_parameters(self, t: float) -> np.ndarray:
        return np.unique(
            np.concatenate(
                (
                    [0.0],
                    np.geomspace(self.h_max * 1e-12, self.h_max, 385),
                    np.linspace(0.0, self.h_max, 129),
                )
            )
        )


def pullback_piece(side: Side, fan: FanPartition, spec: TraceSpec, anchor: float = 0.0) -> PullbackPiece:
    return PullbackPiece(
        side=side, anchor=anchor, curve=fan.curve(side), spec=spec, h_max=spec.delta_prime
    )


# ============================================================================
# PULLBACK MAPS
# ============================================================================

class PullbackMap(BaseModel):
    """Sampled arrival times h(x2) on one side of the origin."""

    side: Side
    x2: List[float]
    h: List[float]
    slope_at_zero: float
    slope_estimate: float = math.nan

    model_config = ConfigDict(frozen=True)

    @property
    def stitch_point(self) -> float:
        """x2 of the characteristic arriving at the end of the bridge window."""
        return self.x2[int(np.argmax(np.abs(self.x2)))]


def limit_slope(side: Side, spec: TraceSpec, consts: FanConstants) -> float:
    """h'(0) = 1 / (nu(0+) - lambda^nu(0+)) with eps_delta(0+) = 0."""
    base = (spec.inner_base(Side.LEFT), spec.inner_base(Side.RIGHT))
    states = (
        density_from_speed(base[0], spec.w1),
        momentum_from_speed(base[0], spec.w1),
        density_from_speed(base[1], spec.w1),
        momentum_from_speed(base[1], spec.w1),
    )
    k = interface_kernel(*states, consts, 0.0)
    nu = float(k["nu_minus"] if side == Side.LEFT else k["nu_plus"])
    return 1.0 / (nu - spec.inner_base(side))


def pullback_h(
    side: Side,
    fan: FanPartition,
    spec: TraceSpec,
    consts: Optional[FanConstants] = None,
    pullback_min: float = 1e-8,
    per_decade: int = 16,
) -> PullbackMap:
    """
    Solve nu~(h) = x2 + h lambda^nu(h) on a signed log grid of x2.

    Raises:
        DomainError: the requested grid reaches beyond the pulled-back region
        CharacteristicsError: no root in [0, delta']
    """
    if side == Side.CENTER:
        raise DomainError("pullback maps live on the left or right of the origin")
    consts = consts or FanConstants()
    piece = pullback_piece(side, fan, spec)
    x_end = float(piece.position(0.0, spec.delta_prime))
    if not pullback_min < abs(x_end):
        raise DomainError(f"pullback_min={pullback_min} exceeds the pulled-back width {abs(x_end):.6g}")

    decades = math.log10(abs(x_end) / pullback_min)
    count = max(int(math.ceil(decades * per_decade)) + 1, 8)
    targets = math.copysign(1.0, x_end) * np.geomspace(pullback_min, abs(x_end), count)
    targets[-1] = x_end

    hs = [0.0]
    for x in targets:
        hs.append(
            solve_bracketed(
                lambda h, x=x: float(piece.position(0.0, h)) - x,
                0.0,
                spec.delta_prime,
                xtol=max(abs(x) * 1e-15, 1e-300),
            )
        )
    x2 = [0.0] + targets.tolist()

    q1 = hs[1] / x2[1]
    q2 = hs[2] / x2[2]
    ratio = x2[2] / x2[1]
    estimate = (ratio * q1 - q2) / (ratio - 1.0)

    result = PullbackMap(
        side=side,
        x2=x2,
        h=hs,
        slope_at_zero=limit_slope(side, spec, consts),
        slope_estimate=estimate,
    )
    logger.debug(
        "Pullback map sampled",
        side=side.value,
        samples=len(x2),
        stitch_point=x_end,
        slope_at_zero=result.slope_at_zero,
        slope_estimate=estimate,
    )
    return result


def hypothesis_check(pmap: PullbackMap) -> VerificationReport:
    """
    Measure the assumptions a pullback map must satisfy.

    Checks h(0) = 0, the sign of h'(0), monotonicity in |x2|, and that
    |h''(x2)| |x2| grows no faster than (1 + sqrt|log|x2|| + log|log|x2||)^2
    as x2 -> 0, judged by the slope of a log-log fit over |x2| <= 1e-2.
    """
    report = VerificationReport(title=f"Pullback hypotheses ({pmap.side.value})")
    x = np.abs(np.asarray(pmap.x2, dtype=float))
    h = np.asarray(pmap.h, dtype=float)
    order = np.argsort(x)
    x, h = x[order], h[order]

    at_zero = h[x == 0.0]
    h0 = float(at_zero[0]) if len(at_zero) else float(h[0])
    report.add("h_at_zero", h0 == 0.0 if len(at_zero) else abs(h0) < 1e-6, abs(h0), 0.0)

    expected = -1.0 if pmap.side == Side.LEFT else 1.0
    report.add(
        "slope_sign",
        math.copysign(1.0, pmap.slope_at_zero) == expected and pmap.slope_at_zero != 0.0,
        pmap.slope_at_zero,
    )

    steps = np.diff(h)
    report.add("monotone", bool(np.all(steps > 0.0)), float(np.min(steps)), 0.0)

    keep = x > 0.0
    x, h = x[keep], h[keep]
    xi = x[1:-1]
    second = 2.0 * (
        (h[2:] - h[1:-1]) / (x[2:] - x[1:-1]) - (h[1:-1] - h[:-2]) / (x[1:-1] - x[:-2])
    ) / (x[2:] - x[:-2])
    window = xi <= 1e-2
    magnitude = np.abs(second[window]) * xi[window]
    scale = max(1.0, float(np.max(np.abs(h / x))))

    if len(magnitude) < 3:
        slope = math.inf
    elif float(np.max(magnitude)) <= 1e-12 * scale:
        slope = 0.0
    else:
        xs = xi[window]
        positive = magnitude > 0.0
        log_x = np.abs(np.log(xs[positive]))
        envelope = (1.0 + np.sqrt(log_x) + np.log(log_x)) ** 2
        slope = float(np.polyfit(log_x, np.log(magnitude[positive] / envelope), 1)[0])
    report.add("envelope", slope <= ENVELOPE_SLOPE_LIMIT, slope, ENVELOPE_SLOPE_LIMIT)

    report.quantities.update(
        {
            "slope_at_zero": pmap.slope_at_zero,
            "slope_estimate": pmap.slope_estimate,
            "envelope_slope": slope,
            "samples": float(len(pmap.x2)),
        }
    )
    return report


# ============================================================================
# THE DATUM
# ============================================================================

class ReconstructedDatum(LambdaProfile):
    """Profile whose excluded region after the collapse is the fan itself."""

    fan: FanPartition

    def cone_bounds(self, t: float) -> Tuple[float, float]:
        left, right = self.fan.positions(max(t - (self.collapse_time or 0.0), 0.0))
        return float(left), float(right)


class InitialDatum(BaseModel):
    """
    Reconstructed datum with its Euler fields.

    ``profile`` evaluated in collapse mode gives lambda1 at the collapse
    time; located at t = 0 it gives the smooth datum that compresses into it.
    """

    profile: ReconstructedDatum
    w1: float
    spec: TraceSpec
    left: PullbackMap
    right: PullbackMap

    def lambda0(self, x2: float) -> float:
        return self.profile.evaluate(x2)

    def state(self, x2: float) -> EulerState:
        return state_from_wave(self.lambda0(x2), self.w1)

    def smooth_value(self, x2: float) -> float:
        index, p = self.profile.locate(0.0, x2)
        return float(self.profile.pieces[index].speed(p))

    def _frame(self, xs: Sequence[float], values: np.ndarray, names: Sequence[str]) -> pd.DataFrame:
        return pd.DataFrame(
            {
                names[0]: np.asarray(xs, dtype=float),
                names[1]: values,
                names[2]: density_from_speed(values, self.w1),
                names[3]: momentum_from_speed(values, self.w1),
            }
        )

    def table(self, xs: Sequence[float]) -> pd.DataFrame:
        """Rows (x2, lambda1_0, rho0, m2_0) at the collapse time."""
        values = np.array([self.lambda0(float(x)) for x in xs])
        return self._frame(xs, values, ("x2", "lambda1_0", "rho0", "m2_0"))

    def smooth_table(self, xs: Sequence[float]) -> pd.DataFrame:
        """Rows (x2, lambda1, rho, m2) of the smooth datum at t = 0."""
        values = np.array([self.smooth_value(float(x)) for x in xs])
        return self._frame(xs, values, ("x2", "lambda1", "rho", "m2"))


def build_initial_datum(
    left: PullbackMap,
    right: PullbackMap,
    spec: TraceSpec,
    fan: FanPartition,
    zeta1: float = 0.3,
    T: float = 1.0,
) -> InitialDatum:
    """
    Stitch the pulled-back pieces with the plateaus and the focusing fan.

    Raises:
        GeometryError: maps on the wrong sides, a stitch point beyond zeta1,
            a fan that does not cover the bridge window, or a value jump at
            a stitch point
    """
    if left.side != Side.LEFT or right.side != Side.RIGHT:
        raise GeometryError("pullback maps must be given as (left, right)")
    if fan.T_end < spec.delta_prime:
        raise GeometryError(f"fan ends at {fan.T_end} before delta'={spec.delta_prime}")
    x_left, x_right = left.stitch_point, right.stitch_point
    if abs(x_left) > zeta1 or abs(x_right) > zeta1:
        raise GeometryError(
            f"stitch points ({x_left:.6g}, {x_right:.6g}) fall outside |x2| <= zeta1={zeta1}"
        )

    pieces: List[CharacteristicPiece] = [
        ConstantPiece(side=Side.LEFT, anchor=T, value=spec.lambda_minus, hi=x_left),
        pullback_piece(Side.LEFT, fan, spec, anchor=T),
        LinearPiece(anchor=T, lam_lo=spec.inner_base(Side.RIGHT), lam_hi=spec.inner_base(Side.LEFT)),
        pullback_piece(Side.RIGHT, fan, spec, anchor=T),
        ConstantPiece(side=Side.RIGHT, anchor=T, value=spec.lambda_plus, lo=x_right),
    ]
    profile = ReconstructedDatum(
        lambda_minus=spec.lambda_minus,
        lambda_plus=spec.lambda_plus,
        T=T,
        zeta1=zeta1,
        zeta2=spec.zeta2_over_T * T,
        mode=ProfileMode.COLLAPSE,
        collapse_time=T,
        pieces=pieces,
        fan=fan,
    )
    profile.validate_geometry()

    jumps = [abs(value) for _, value, _ in profile.joint_jumps(T)]
    if max(jumps) > 1e-10:
        raise GeometryError(f"stitching discontinuity {max(jumps):.3g} in the reconstructed datum")

    logger.info(
        "Initial datum reconstructed",
        stitch_left=x_left,
        stitch_right=x_right,
        a_minus=spec.amplitude_minus,
        a_plus=spec.amplitude_plus,
    )
    return InitialDatum(profile=profile, w1=spec.w1, spec=spec, left=left, right=right)


def round_trip(
    datum: InitialDatum,
    fan: FanPartition,
    spec: TraceSpec,
    times: Sequence[float],
    root_tolerance: float = 1e-10,
) -> float:
    """
    Largest deviation between the prescribed traces and the Burgers solution
    of the datum sampled along the fan curves.
    """
    sol = CharSolution(profile=datum.profile, root_tolerance=root_tolerance)
    T = datum.profile.collapse_time or 0.0
    worst = 0.0
    for s in times:
        for side in (Side.LEFT, Side.RIGHT):
            x = float(fan.curve(side).position(s))
            value = eval_solution(T + s, x, sol)
            worst = max(worst, abs(value - trace_speed(s, spec, side)))
    return worst


def derivative_decay(
    datum: InitialDatum,
    side: Side,
    feet: Sequence[float] = (1e-4, 1e-6, 1e-8),
    orders: Sequence[int] = (1, 2, 3),
) -> Dict[int, List[float]]:
    """
    Distance of the smooth datum's x-derivatives to those of the focusing fan,
    along characteristics arriving at fan times ``feet``.

    The focusing fan is linear with slope -1/T, so the distances measure how
    smoothly the pulled-back piece joins it.
    """
    profile = datum.profile
    T = profile.collapse_time or 0.0
    piece = next(p for p in profile.pieces if isinstance(p, PullbackPiece) and p.side == side)
    sol = CharSolution(profile=profile)
    fan_derivative = {1: -1.0 / T}

    gaps: Dict[int, List[float]] = {n: [] for n in orders}
    for h in feet:
        x = float(piece.position(0.0, h))
        for n in orders:
            gaps[n].append(abs(eval_dx(0.0, x, sol, n) - fan_derivative.get(n, 0.0)))
    return gaps


def datum_report(
    datum: InitialDatum,
    fan: FanPartition,
    spec: TraceSpec,
    round_trip_times: Sequence[float],
    zeta1: float,
) -> VerificationReport:
    """Checks and key numbers for the reconstructed datum."""
    report = VerificationReport(title="Reconstructed initial datum")
    for pmap in (datum.left, datum.right):
        for check in hypothesis_check(pmap).checks:
            report.add(f"{pmap.side.value}_{check.name}", check.passed, check.value, check.threshold)

    deviation = round_trip(datum, fan, spec, round_trip_times)
    report.add("round_trip", deviation < 1e-6, deviation, 1e-6)

    plateau = max(
        abs(datum.lambda0(-zeta1 - 1e-3) - spec.lambda_minus),
        abs(datum.lambda0(zeta1 + 1e-3) - spec.lambda_plus),
    )
    report.add("plateau_exact", plateau == 0.0, plateau, 0.0)

    for side in (Side.LEFT, Side.RIGHT):
        gaps = derivative_decay(datum, side)
        for n, values in gaps.items():
            if n < 3:
                decreasing = all(b < a for a, b in zip(values[:-1], values[1:]))
                report.add(f"{side.value}_derivative_decay_{n}", decreasing, values[-1])
            report.quantities[f"{side.value}_derivative_gap_{n}"] = values[-1]

    report.quantities.update(
        {
            "stitch_left": datum.left.stitch_point,
            "stitch_right": datum.right.stitch_point,
            "slope_at_zero_left": datum.left.slope_at_zero,
            "slope_at_zero_right": datum.right.slope_at_zero,
            "slope_estimate_left": datum.left.slope_estimate,
            "slope_estimate_right": datum.right.slope_estimate,
            "a_minus": spec.amplitude_minus,
            "a_plus": spec.amplitude_plus,
            "b_minus": spec.inner_base(Side.LEFT),
            "b_plus": spec.inner_base(Side.RIGHT),
        }
    )
    return report
