"""
Smooth compression-wave profiles.

The building block is the log-log profile

    f0(x) = 1 - (2/pi) * arctan(log|log x|),   0 < x < 1,

which increases from 0 (at x -> 0+) to 2 (at x -> 1-) with an infinite
slope at the origin. Composite profiles b +- a*f0(k|x|) glue to constant
far-field speeds through quintic Hermite bridges, and the central focusing
fan -x/(T - t) closes the gap between the two composite pieces.

Every piece is stored as a characteristic chart: a parameter p, the
characteristic speed lambda(p) and the position X(t, p) of that
characteristic at time t. The same chart answers both "what is the profile
at the collapse time" and "where did this characteristic start", so the
t = 0 datum and the collapse profile share one representation.

Composite pieces are parametrized by their value v = f0(y) rather than by
y itself. y(v) = exp(-exp(cot(pi*v/2))) underflows long before v does,
which keeps the singular corner at the origin resolvable in double
precision.

Philosophy:
- Exact piecewise formulas, no global spline fits
- Derivatives of the charts are closed-form; finite differences only check them
- Geometry is validated when a profile is built, not when it is evaluated
"""

import math
from abc import ABC, abstractmethod
from typing import Annotated, Any, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr
from scipy.interpolate import BPoly

from src.core.exceptions import (
    CharacteristicsError,
    DomainError,
    GeometryError,
    ShockConeError,
)
from src.core.models import F0Params, HSpec, ProfileMode, Side
from src.utils.logger import get_logger
from src.utils.roots import (
    XTOL,
    adaptive_step,
    central_difference,
    sign_change_brackets,
    solve_bracketed,
)

logger = get_logger()

TWO_OVER_PI = 2.0 / math.pi
HALF_PI = 0.5 * math.pi
LOG_HALF_PI = math.log(HALF_PI)

# Largest k*zeta_bar for which the composite stays inside the f0 regime
COMPOSITE_LIMIT = math.exp(-1.0)

# Samples per piece when several characteristics may reach one point
BRACKET_SAMPLES = 129


# ============================================================================
# THE f0 PROFILE
# ============================================================================

def _f0(x):
    return 1.0 - TWO_OVER_PI * np.arctan(np.log(np.abs(np.log(x))))


def _f0_first(x):
    u = np.log(x)
    L = np.log(np.abs(u))
    return -TWO_OVER_PI / ((1.0 + L * L) * x * u)


def _f0_second(x):
    u = np.log(x)
    L = np.log(np.abs(u))
    q = 1.0 + L * L
    return TWO_OVER_PI * (2.0 * L + q * (1.0 + u)) / (q * q * x * x * u * u)


def _check_unit_interval(x: float) -> float:
    x = float(x)
    if not (0.0 < x < 1.0):
        raise DomainError(f"f0 is defined on (0, 1), got x={x}")
    return x


def f0_eval(x: float) -> float:
    """
    Evaluate f0(x) = 1 - (2/pi) arctan(log|log x|).

    Raises:
        DomainError: x <= 0 or x >= 1

    Example:
        >>> f0_eval(math.exp(-math.e))
        0.5
    """
    return float(_f0(_check_unit_interval(x)))


def f0_derivative(x: float, n: int = 1) -> float:
    """
    n-th derivative of f0.

    Orders 1 and 2 are closed forms; higher orders are nested central
    differences of the order below.

    Raises:
        DomainError: x outside (0, 1) or n < 1
    """
    x = _check_unit_interval(x)
    if n < 1:
        raise DomainError(f"derivative order must be >= 1, got {n}")
    if n == 1:
        return float(_f0_first(x))
    if n == 2:
        return float(_f0_second(x))

    h = min(adaptive_step(x), 0.5 * x, 0.5 * (1.0 - x))
    return central_difference(lambda y: f0_derivative(y, n - 1), x, h)


def f0_array(x: np.ndarray) -> np.ndarray:
    """Vectorized f0 without domain checks."""
    return _f0(np.asarray(x, dtype=float))


def f0_first_array(x: np.ndarray) -> np.ndarray:
    return _f0_first(np.asarray(x, dtype=float))


def f0_second_array(x: np.ndarray) -> np.ndarray:
    return _f0_second(np.asarray(x, dtype=float))


# ============================================================================
# VALUE PARAMETRIZATION y(v), v = f0(y)
# ============================================================================

def _cot_half_pi(v):
    with np.errstate(divide="ignore"):
        return 1.0 / np.tan(HALF_PI * v)


def f0_inverse(v):
    """y(v) with f0(y(v)) = v, for v in [0, 2); y(0) = 0."""
    v = np.asarray(v, dtype=float)
    L = _cot_half_pi(v)
    with np.errstate(over="ignore"):
        out = np.exp(-np.exp(L))
    return out if out.ndim else float(out)


def f0_inverse_derivative(v, n: int = 1):
    """
    dy/dv (n = 1) or d2y/dv2 (n = 2) of the inverse profile.

    Evaluated in log form so the super-exponential decay near v = 0 gives
    exact zeros instead of inf * 0.
    """
    v = np.asarray(v, dtype=float)
    L = _cot_half_pi(v)
    with np.errstate(over="ignore", invalid="ignore"):
        eL = np.exp(L)
        finite = np.isfinite(eL) & (v > 0.0)
        Ls = np.where(finite, L, 0.0)
        eLs = np.where(finite, eL, 0.0)
        q = np.log1p(Ls * Ls)
        if n == 1:
            out = np.exp(LOG_HALF_PI + q + Ls - eLs)
        elif n == 2:
            base = 2.0 * LOG_HALF_PI + q + Ls - eLs
            out = -np.exp(base) * (2.0 * Ls + 1.0 + Ls * Ls) + np.exp(base + q + Ls)
        else:
            raise DomainError(f"inverse-profile derivative order must be 1 or 2, got {n}")
        out = np.where(finite, out, 0.0)
    return out if out.ndim else float(out)


def _const_like(p, value: float):
    if np.ndim(p) == 0:
        return float(value)
    return np.full(np.shape(p), float(value))


def _finite(p: Optional[float], default: float) -> float:
    return default if p is None else p


# ============================================================================
# CHARACTERISTIC PIECES
# ============================================================================

class CharacteristicPiece(BaseModel, ABC):
    """
    One family of characteristics carrying a monotone piece of the profile.

    Subclasses define lambda(p) and X(t, p) together with their first and
    second derivatives in p. ``anchor`` is the time at which the parameter
    is read off directly as a position (the collapse time for collapse
    profiles, 0 for data prescribed at t = 0).
    """

    kind: str
    side: Side
    anchor: float = 0.0

    model_config = ConfigDict(extra="forbid")

    # -- parameter range -----------------------------------------------------

    @abstractmethod
    def bounds(self) -> Tuple[float, float]:
        ...

    @property
    @abstractmethod
    def left_param(self) -> float:
        """Parameter of the left-most characteristic (before any collapse)."""
        ...

    @property
    @abstractmethod
    def right_param(self) -> float:
        ...

    # -- chart ---------------------------------------------------------------

    @abstractmethod
    def speed(self, p):
        ...

    @abstractmethod
    def speed_dp(self, p):
        ...

    @abstractmethod
    def speed_dpp(self, p):
        ...

    @abstractmethod
    def position(self, t: float, p):
        ...

    @abstractmethod
    def position_dp(self, t: float, p):
        ...

    @abstractmethod
    def position_dpp(self, t: float, p):
        ...

    # -- direct reading at the anchor time -----------------------------------

    @abstractmethod
    def anchor_interval(self) -> Tuple[float, float]:
        ...

    @abstractmethod
    def value_at_anchor(self, y: float) -> float:
        ...

    # -- inversion -----------------------------------------------------------

    def x_range(self, t: float) -> Tuple[float, float]:
        a = float(self.position(t, self.left_param))
        b = float(self.position(t, self.right_param))
        return (a, b) if a <= b else (b, a)

    def invert(self, t: float, x: float, xtol: float = XTOL) -> float:
        """Parameter of the characteristic through (t, x) on a monotone chart."""
        lo, hi = self.bounds()
        return solve_bracketed(lambda p: float(self.position(t, p)) - x, lo, hi, xtol=xtol)

    def sample_parameters(self, t: float) -> np.ndarray:
        lo, hi = self.bounds()
        return np.linspace(lo, hi, BRACKET_SAMPLES)

    def clamp(self, p: float) -> float:
        lo, hi = self.bounds()
        return min(max(p, lo), hi)


class ConstantPiece(CharacteristicPiece):
    """Plateau lambda = value; the parameter is the position at the anchor time."""

    kind: Literal["constant"] = "constant"
    value: float
    lo: Optional[float] = None
    hi: Optional[float] = None

    def bounds(self) -> Tuple[float, float]:
        return (_finite(self.lo, -math.inf), _finite(self.hi, math.inf))

    @property
    def left_param(self) -> float:
        return _finite(self.lo, -math.inf)

    @property
    def right_param(self) -> float:
        return _finite(self.hi, math.inf)

    def speed(self, p):
        return _const_like(p, self.value)

    def speed_dp(self, p):
        return _const_like(p, 0.0)

    def speed_dpp(self, p):
        return _const_like(p, 0.0)

    def position(self, t: float, p):
        return p + (t - self.anchor) * self.value

    def position_dp(self, t: float, p):
        return _const_like(p, 1.0)

    def position_dpp(self, t: float, p):
        return _const_like(p, 0.0)

    def anchor_interval(self) -> Tuple[float, float]:
        return self.bounds()

    def value_at_anchor(self, y: float) -> float:
        return self.value

    def invert(self, t: float, x: float, xtol: float = XTOL) -> float:
        p = x - (t - self.anchor) * self.value
        lo, hi = self.bounds()
        slack = 1e-12 * (1.0 + abs(p))
        if p < lo - slack or p > hi + slack:
            raise CharacteristicsError(f"x={x} is not reached by the plateau {self.value}")
        return self.clamp(p)


class LinearPiece(CharacteristicPiece):
    """Focusing fan lambda = -x/(focus - t); the parameter is lambda itself."""

    kind: Literal["linear"] = "linear"
    side: Side = Side.CENTER
    lam_lo: float
    lam_hi: float

    def bounds(self) -> Tuple[float, float]:
        return (self.lam_lo, self.lam_hi)

    @property
    def left_param(self) -> float:
        return self.lam_hi

    @property
    def right_param(self) -> float:
        return self.lam_lo

    def speed(self, p):
        return p

    def speed_dp(self, p):
        return _const_like(p, 1.0)

    def speed_dpp(self, p):
        return _const_like(p, 0.0)

    def position(self, t: float, p):
        return (t - self.anchor) * p

    def position_dp(self, t: float, p):
        return _const_like(p, t - self.anchor)

    def position_dpp(self, t: float, p):
        return _const_like(p, 0.0)

    def anchor_interval(self) -> Tuple[float, float]:
        return (0.0, 0.0)

    def value_at_anchor(self, y: float) -> float:
        raise GeometryError("the focusing fan has no extent at the collapse time")

    def invert(self, t: float, x: float, xtol: float = XTOL) -> float:
        if t == self.anchor:
            raise CharacteristicsError("all fan characteristics meet at the focus")
        p = -x / (self.anchor - t)
        slack = 1e-12 * (1.0 + abs(p))
        if p < self.lam_lo - slack or p > self.lam_hi + slack:
            raise CharacteristicsError(f"x={x} is outside the focusing fan at t={t}")
        return self.clamp(p)


class CompositePiece(CharacteristicPiece):
    """
    Composite piece lambda = b + sign*a*f0(k*|y|) on one side of the focus.

    Parametrized by v = f0(k|y|) in [0, v_max]; ``mirror`` is -1 for y < 0
    and +1 for y > 0, ``sign`` is the direction in which lambda grows with v.
    """

    kind: Literal["composite"] = "composite"
    a: float = Field(gt=0.0)
    b: float
    k: float = Field(gt=0.0)
    mirror: Literal[-1, 1]
    sign: Literal[-1, 1]
    radius: float = Field(gt=0.0, description="Extent |y| at the anchor time")
    v_max: float = Field(gt=0.0)

    def bounds(self) -> Tuple[float, float]:
        return (0.0, self.v_max)

    @property
    def left_param(self) -> float:
        return self.v_max if self.mirror < 0 else 0.0

    @property
    def right_param(self) -> float:
        return 0.0 if self.mirror < 0 else self.v_max

    def speed(self, p):
        return self.b + self.sign * self.a * p

    def speed_dp(self, p):
        return _const_like(p, self.sign * self.a)

    def speed_dpp(self, p):
        return _const_like(p, 0.0)

    def position(self, t: float, p):
        return self.mirror * f0_inverse(p) / self.k + (t - self.anchor) * self.speed(p)

    def position_dp(self, t: float, p):
        return (
            self.mirror * f0_inverse_derivative(p, 1) / self.k
            + (t - self.anchor) * self.sign * self.a
        )

    def position_dpp(self, t: float, p):
        return self.mirror * f0_inverse_derivative(p, 2) / self.k

    def anchor_interval(self) -> Tuple[float, float]:
        if self.mirror < 0:
            return (-self.radius, 0.0)
        return (0.0, self.radius)

    def value_at_anchor(self, y: float) -> float:
        r = self.k * self.mirror * y
        v = 0.0 if r <= 0.0 else f0_eval(r)
        return float(self.speed(v))

    def invert(self, t: float, x: float, xtol: float = XTOL) -> float:
        if t == self.anchor:
            r = self.k * self.mirror * x
            if r <= 0.0:
                return 0.0
            return self.clamp(f0_eval(r))
        return super().invert(t, x, xtol)


class BridgePiece(CharacteristicPiece):
    """
    Quintic Hermite bridge in the anchor coordinate y in [y0, y1].

    ``start`` and ``end`` hold (value, first, second derivative) at y0 and
    y1; the parameter is y itself.
    """

    kind: Literal["bridge"] = "bridge"
    y0: float
    y1: float
    start: Tuple[float, float, float]
    end: Tuple[float, float, float]

    _poly: Any = PrivateAttr(default=None)
    _dpoly: Any = PrivateAttr(default=None)
    _ddpoly: Any = PrivateAttr(default=None)

    def model_post_init(self, __context: Any) -> None:
        self._poly = BPoly.from_derivatives([self.y0, self.y1], [list(self.start), list(self.end)])
        self._dpoly = self._poly.derivative()
        self._ddpoly = self._poly.derivative(2)

    def bounds(self) -> Tuple[float, float]:
        return (self.y0, self.y1)

    @property
    def left_param(self) -> float:
        return self.y0

    @property
    def right_param(self) -> float:
        return self.y1

    def _eval(self, poly, p):
        out = poly(p)
        return float(out) if np.ndim(out) == 0 else out

    def speed(self, p):
        return self._eval(self._poly, p)

    def speed_dp(self, p):
        return self._eval(self._dpoly, p)

    def speed_dpp(self, p):
        return self._eval(self._ddpoly, p)

    def position(self, t: float, p):
        return p + (t - self.anchor) * self.speed(p)

    def position_dp(self, t: float, p):
        return 1.0 + (t - self.anchor) * self.speed_dp(p)

    def position_dpp(self, t: float, p):
        return (t - self.anchor) * self.speed_dpp(p)

    def anchor_interval(self) -> Tuple[float, float]:
        return (self.y0, self.y1)

    def value_at_anchor(self, y: float) -> float:
        return float(self.speed(y))

    def check_monotone(self, samples: int = 1025) -> None:
        """
        Raise GeometryError unless the bridge is strictly monotone inside.

        Uses the analytic derivative of the quintic on a dense grid.
        """
        direction = np.sign(self.end[0] - self.start[0])
        if direction == 0.0:
            raise GeometryError("bridge endpoints carry equal values")
        ys = np.linspace(self.y0, self.y1, samples)[1:-1]
        slopes = direction * self._dpoly(ys)
        if np.min(slopes) <= 0.0:
            worst = float(ys[int(np.argmin(slopes))])
            raise GeometryError(
                f"non-monotone bridge on [{self.y0}, {self.y1}] near y={worst:.6g}"
            )


ParametricPiece = Annotated[
    Union[ConstantPiece, LinearPiece, CompositePiece, BridgePiece],
    Field(discriminator="kind"),
]


def quintic_bridge(
    y0: float,
    y1: float,
    start: Tuple[float, float, float],
    end: Tuple[float, float, float],
    side: Side,
    anchor: float = 0.0,
) -> BridgePiece:
    """Build a bridge and verify it is strictly monotone."""
    piece = BridgePiece(side=side, anchor=anchor, y0=y0, y1=y1, start=start, end=end)
    piece.check_monotone()
    return piece


# ============================================================================
# PROFILES
# ============================================================================

def cone_slopes(lambda_minus: float, lambda_plus: float, zeta2: float, T: float) -> Tuple[float, float]:
    """Slopes 1/2 (lambda_+ + lambda_- -+ zeta2/T) of the rays bounding the shock."""
    mean = lambda_plus + lambda_minus
    return 0.5 * (mean - zeta2 / T), 0.5 * (mean + zeta2 / T)


class ProfileDocument(BaseModel):
    """Serialized form of a profile built from parametric pieces."""

    lambda_minus: float
    lambda_plus: float
    T: float
    zeta1: float
    zeta2: float
    mode: ProfileMode
    collapse_time: Optional[float]
    pieces: List[ParametricPiece]


class LambdaProfile(BaseModel):
    """
    Piecewise description of the Burgers datum lambda1.

    Pieces are ordered left to right. ``collapse_time`` is the time at which
    the characteristics of the two sides first meet (None if they never do).
    In COLLAPSE mode ``evaluate`` reads the profile at the anchor time; in
    INITIAL mode it reads it at t = 0 by following characteristics back.
    """

    lambda_minus: float
    lambda_plus: float
    T: float = Field(gt=0.0)
    zeta1: float = Field(ge=0.0)
    zeta2: float = Field(ge=0.0)
    mode: ProfileMode = ProfileMode.INITIAL
    collapse_time: Optional[float] = None
    pieces: List[CharacteristicPiece] = Field(min_length=1)

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, x: float) -> float:
        """Profile value at x in the profile's own mode."""
        if self.mode == ProfileMode.COLLAPSE:
            return self._evaluate_at_anchor(x)
        index, p = self.locate(0.0, x)
        return float(self.pieces[index].speed(p))

    def evaluate_many(self, xs) -> np.ndarray:
        return np.array([self.evaluate(float(x)) for x in np.asarray(xs, dtype=float)])

    def _evaluate_at_anchor(self, x: float) -> float:
        for piece in self.pieces:
            if piece.side == Side.CENTER:
                continue
            lo, hi = piece.anchor_interval()
            if lo <= x <= hi:
                return piece.value_at_anchor(x)
        raise GeometryError(f"no piece covers x={x} at the collapse time")

    def locate(self, t: float, x: float, xtol: float = XTOL) -> Tuple[int, float]:
        """
        Find the piece and parameter of the characteristic through (t, x).

        Before the collapse time the pieces tile the line and exactly one
        characteristic arrives. At or after it, the open cone between the
        bounding rays is rejected and, among the characteristics of the
        matching side, the one starting farthest from the focus is kept.

        Raises:
            ShockConeError: (t, x) inside the post-collapse cone
            CharacteristicsError: no characteristic reaches x
        """
        tc = self.collapse_time
        if tc is not None and t >= tc:
            return self._locate_after_collapse(t, x, tc, xtol)

        nearest, gap = None, math.inf
        for index, piece in enumerate(self.pieces):
            lo, hi = piece.x_range(t)
            if lo <= x <= hi:
                return index, piece.invert(t, x, xtol)
            distance = lo - x if x < lo else x - hi
            if distance < gap:
                nearest, gap = index, distance

        # Adjacent ranges may miss each other by rounding
        if nearest is not None and gap <= 1e-12 * (1.0 + abs(x)):
            piece = self.pieces[nearest]
            ends = (piece.left_param, piece.right_param)
            distances = [abs(float(piece.position(t, p)) - x) for p in ends]
            return nearest, ends[int(np.argmin(distances))]
        raise CharacteristicsError(f"no characteristic reaches x={x} at t={t}")

    def cone_bounds(self, t: float) -> Tuple[float, float]:
        """Edges at time t of the open region excluded after the collapse."""
        s_minus, s_plus = cone_slopes(self.lambda_minus, self.lambda_plus, self.zeta2, self.T)
        elapsed = t - (self.collapse_time or 0.0)
        return s_minus * elapsed, s_plus * elapsed

    def _locate_after_collapse(self, t: float, x: float, tc: float, xtol: float) -> Tuple[int, float]:
        lower, upper = self.cone_bounds(t)
        if x <= lower:
            side = Side.LEFT
        elif x >= upper:
            side = Side.RIGHT
        else:
            raise ShockConeError(f"x={x} lies inside the shock cone ({lower}, {upper}) at t={t}")

        roots: List[Tuple[int, float]] = []
        for index, piece in enumerate(self.pieces):
            if piece.side != side:
                continue
            if isinstance(piece, ConstantPiece):
                try:
                    roots.append((index, piece.invert(t, x, xtol)))
                except CharacteristicsError:
                    pass
                continue
            params = piece.sample_parameters(t)
            values = np.asarray(piece.position(t, params), dtype=float) - x
            for lo, hi in sign_change_brackets(params, values):
                if lo == hi:
                    roots.append((index, float(lo)))
                else:
                    roots.append((index, solve_bracketed(
                        lambda p, piece=piece: float(piece.position(t, p)) - x, lo, hi, xtol=xtol
                    )))

        if not roots:
            raise CharacteristicsError(f"no {side.value} characteristic reaches x={x} at t={t}")

        feet = [float(self.pieces[i].position(tc, p)) for i, p in roots]
        pick = int(np.argmin(feet)) if side == Side.LEFT else int(np.argmax(feet))
        return roots[pick]

    # -- geometry ------------------------------------------------------------

    def breakpoints(self, t: float) -> List[float]:
        """Positions at time t of the joints between consecutive pieces."""
        return [
            float(piece.position(t, piece.right_param))
            for piece in self.pieces[:-1]
        ]

    def joint_jumps(self, t: float) -> List[Tuple[float, float, float]]:
        """
        Mismatch at each joint: (position gap, value jump, slope jump).

        Slopes are d lambda / dx = lambda_p / X_p from each side; joints
        where a side has a vanishing X_p (the focus at collapse) report nan.
        """
        jumps = []
        for left, right in zip(self.pieces[:-1], self.pieces[1:]):
            pl, pr = left.right_param, right.left_param
            gap = float(right.position(t, pr) - left.position(t, pl))
            value = float(right.speed(pr) - left.speed(pl))
            with np.errstate(divide="ignore", invalid="ignore"):
                sl = np.float64(left.speed_dp(pl)) / np.float64(left.position_dp(t, pl))
                sr = np.float64(right.speed_dp(pr)) / np.float64(right.position_dp(t, pr))
            jumps.append((gap, value, float(sr - sl)))
        return jumps

    def validate_geometry(self) -> None:
        """Raise GeometryError if the pieces overlap before any collapse."""
        if self.collapse_time is not None and self.collapse_time <= 0.0:
            return
        points = self.breakpoints(0.0)
        for a, b in zip(points[:-1], points[1:]):
            if not a < b:
                raise GeometryError(f"overlapping breakpoints at t=0: {a} >= {b}")

    # -- serialization -------------------------------------------------------

    def to_document(self) -> str:
        """JSON document listing every piece with its named parameters."""
        try:
            document = ProfileDocument(
                lambda_minus=self.lambda_minus,
                lambda_plus=self.lambda_plus,
                T=self.T,
                zeta1=self.zeta1,
                zeta2=self.zeta2,
                mode=self.mode,
                collapse_time=self.collapse_time,
                pieces=[piece.model_dump() for piece in self.pieces],
            )
        except ValueError as exc:
            raise GeometryError("profile contains pieces without a parametric form") from exc
        return document.model_dump_json(indent=2)

    @classmethod
    def from_document(cls, text: str) -> "LambdaProfile":
        document = ProfileDocument.model_validate_json(text)
        return cls(**{name: getattr(document, name) for name in ProfileDocument.model_fields})


# ============================================================================
# BUILDERS
# ============================================================================

def build_compression_datum(
    lambda_minus: float,
    lambda_plus: float,
    T: float,
    zeta1: float,
    zeta2: float,
    f0p: F0Params,
    h_spec: Optional[HSpec] = None,
    mode: ProfileMode = ProfileMode.COLLAPSE,
) -> LambdaProfile:
    """
    Build the compression wave that collapses into a jump at time T.

    At the collapse time the profile is lambda_- left of -zeta1, a bridge
    down to b_- + a_- f0(k_- zeta_bar) at -zeta_bar, the composite
    b_- + a_- f0(h_-(y)) up to the focus, and the mirror image on the
    right. At t = 0 the focusing fan -x/T fills [-T b_-, -T b_+].

    Raises:
        GeometryError: inconsistent offsets, overlapping pieces or a
            non-monotone bridge
    """
    h_spec = h_spec or HSpec()
    if not lambda_minus > lambda_plus:
        raise GeometryError("a compression wave needs lambda_minus > lambda_plus")
    if not (0.0 < zeta2 < zeta1 < 1.0):
        raise GeometryError(f"need 0 < zeta2 < zeta1 < 1, got zeta1={zeta1}, zeta2={zeta2}")
    if not T > 0.0:
        raise GeometryError(f"collapse time must be positive, got {T}")
    if not f0p.zeta_bar < zeta1 / 2.0:
        raise GeometryError(f"zeta_bar must be smaller than zeta1/2, got {f0p.zeta_bar}")
    if f0p.b_minus != lambda_minus - zeta2 / T or f0p.b_plus != lambda_plus + zeta2 / T:
        raise GeometryError("b offsets must equal lambda_minus - zeta2/T and lambda_plus + zeta2/T")
    if not f0p.b_minus > f0p.b_plus:
        raise GeometryError("zeta2/T too large: the focusing fan would be empty")

    k_minus, k_plus = -h_spec.slope_minus, h_spec.slope_plus
    zb = f0p.zeta_bar
    for k in (k_minus, k_plus):
        if k * zb > COMPOSITE_LIMIT:
            raise GeometryError(f"h slope {k} pushes the composite past exp(-1)")

    v_minus, v_plus = f0_eval(k_minus * zb), f0_eval(k_plus * zb)
    if not f0p.a_minus * v_minus < zeta2 / T or not f0p.a_plus * v_plus < zeta2 / T:
        raise GeometryError(
            "overlapping breakpoints: a*f0(k*zeta_bar) must stay below zeta2/T"
        )

    left_edge = (
        f0p.b_minus + f0p.a_minus * v_minus,
        -f0p.a_minus * k_minus * f0_derivative(k_minus * zb, 1),
        f0p.a_minus * k_minus ** 2 * f0_derivative(k_minus * zb, 2),
    )
    right_edge = (
        f0p.b_plus - f0p.a_plus * v_plus,
        -f0p.a_plus * k_plus * f0_derivative(k_plus * zb, 1),
        -f0p.a_plus * k_plus ** 2 * f0_derivative(k_plus * zb, 2),
    )

    pieces: List[CharacteristicPiece] = [
        ConstantPiece(side=Side.LEFT, anchor=T, value=lambda_minus, hi=-zeta1),
        quintic_bridge(-zeta1, -zb, (lambda_minus, 0.0, 0.0), left_edge, Side.LEFT, anchor=T),
        CompositePiece(
            side=Side.LEFT, anchor=T, a=f0p.a_minus, b=f0p.b_minus, k=k_minus,
            mirror=-1, sign=1, radius=zb, v_max=v_minus,
        ),
        LinearPiece(anchor=T, lam_lo=f0p.b_plus, lam_hi=f0p.b_minus),
        CompositePiece(
            side=Side.RIGHT, anchor=T, a=f0p.a_plus, b=f0p.b_plus, k=k_plus,
            mirror=1, sign=-1, radius=zb, v_max=v_plus,
        ),
        quintic_bridge(zb, zeta1, right_edge, (lambda_plus, 0.0, 0.0), Side.RIGHT, anchor=T),
        ConstantPiece(side=Side.RIGHT, anchor=T, value=lambda_plus, lo=zeta1),
    ]

    profile = LambdaProfile(
        lambda_minus=lambda_minus,
        lambda_plus=lambda_plus,
        T=T,
        zeta1=zeta1,
        zeta2=zeta2,
        mode=mode,
        collapse_time=T,
        pieces=pieces,
    )
    profile.validate_geometry()

    logger.debug(
        "Compression datum built",
        mode=mode.value,
        collapse_time=T,
        breakpoints=profile.breakpoints(0.0),
    )
    return profile


def riemann_profile(lambda_minus: float, lambda_plus: float, T: float = 1.0) -> LambdaProfile:
    """Piecewise-constant datum lambda_- for x < 0, lambda_+ for x > 0, jumping at t = 0."""
    return LambdaProfile(
        lambda_minus=lambda_minus,
        lambda_plus=lambda_plus,
        T=T,
        zeta1=0.0,
        zeta2=0.0,
        mode=ProfileMode.INITIAL,
        collapse_time=0.0,
        pieces=[
            ConstantPiece(side=Side.LEFT, value=lambda_minus, hi=0.0),
            ConstantPiece(side=Side.RIGHT, value=lambda_plus, lo=0.0),
        ],
    )


def pure_f0_profile() -> LambdaProfile:
    """
    Datum lambda(0, x) = f0(x) on (0, exp(-1)], 0 for x <= 0 and 1 beyond.

    Characteristics spread out for t > 0, so the solution stays smooth and
    the derivative limits at the origin can be observed at any time.
    """
    edge = COMPOSITE_LIMIT
    return LambdaProfile(
        lambda_minus=0.0,
        lambda_plus=1.0,
        T=1.0,
        zeta1=0.0,
        zeta2=0.0,
        mode=ProfileMode.INITIAL,
        collapse_time=None,
        pieces=[
            ConstantPiece(side=Side.LEFT, value=0.0, hi=0.0),
            CompositePiece(
                side=Side.RIGHT, a=1.0, b=0.0, k=1.0, mirror=1, sign=1, radius=edge, v_max=1.0,
            ),
            ConstantPiece(side=Side.RIGHT, value=1.0, lo=edge),
        ],
    )
