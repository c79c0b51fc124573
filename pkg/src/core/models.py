"""
Data models for the wild-data toolkit.

This module defines the shared value types using Pydantic for:
- Runtime validation of physical constraints (positive density, orderings)
- Self-documenting field descriptions
- Deterministic serialization of reports

Types that carry behaviour (profiles, trace specs, solutions) live next to
the code that operates on them; the plain records live here.
"""

import math
from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# ============================================================================
# ENUMS
# ============================================================================

class Side(str, Enum):
    """Which side of the focus a profile piece or fan boundary sits on."""
    LEFT = "left"
    CENTER = "center"
    RIGHT = "right"


class ProfileMode(str, Enum):
    """Whether a profile is read at the collapse time or at t = 0."""
    COLLAPSE = "collapse"
    INITIAL = "initial"


class TraceShape(str, Enum):
    """Boundary-trace families."""
    COMPRESSION = "compression"
    PLATEAU = "plateau"


# ============================================================================
# EULER STATES
# ============================================================================

class EulerState(BaseModel):
    """Density and momentum of the isentropic Euler system; vacuum excluded."""

    rho: float = Field(gt=0.0, description="Density")
    m1: float = Field(default=0.0, description="Momentum, x1 component")
    m2: float = Field(default=0.0, description="Momentum, x2 component")

    model_config = ConfigDict(frozen=True)

    @field_validator('rho')
    @classmethod
    def finite_density(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("density must be finite")
        return v

    @property
    def v1(self) -> float:
        return self.m1 / self.rho

    @property
    def v2(self) -> float:
        return self.m2 / self.rho


class WaveCoordinates(BaseModel):
    """Characteristic speeds and Riemann invariants of the 1-D reduction."""

    lambda1: float
    lambda2: float
    w1: float
    w2: float

    model_config = ConfigDict(frozen=True)


# ============================================================================
# PROFILE PARAMETERS
# ============================================================================

class F0Params(BaseModel):
    """
    Scale factors and offsets of the composite profiles b +- a*f0(h(x)).

    b_minus = lambda_minus - zeta2/T and b_plus = lambda_plus + zeta2/T.
    """

    a_plus: float = Field(gt=0.0)
    a_minus: float = Field(gt=0.0)
    b_plus: float
    b_minus: float
    zeta_bar: float = Field(gt=0.0, description="Radius of the pure-f0 regime")

    @classmethod
    def from_wave(
        cls,
        lambda_minus: float,
        lambda_plus: float,
        T: float,
        zeta2: float,
        a_plus: float,
        a_minus: float,
        zeta_bar: float,
    ) -> "F0Params":
        """Build parameters with the offsets fixed by the far-field speeds."""
        return cls(
            a_plus=a_plus,
            a_minus=a_minus,
            b_plus=lambda_plus + zeta2 / T,
            b_minus=lambda_minus - zeta2 / T,
            zeta_bar=zeta_bar,
        )


class HSpec(BaseModel):
    """Linear inner maps h-(x) = slope_minus*x (x <= 0), h+(x) = slope_plus*x."""

    slope_minus: float = Field(default=-1.0, lt=0.0)
    slope_plus: float = Field(default=1.0, gt=0.0)


# ============================================================================
# FAN DATA
# ============================================================================

class FanConstants(BaseModel):
    """Constants of the fan region under the alpha = gamma2 = 0 ansatz."""

    rho1: float = Field(default=2.0, gt=0.0)
    K: float = Field(default=(58.0 + 2.0 * math.sqrt(13.0)) / 9.0, gt=0.0)
    alpha: float = 0.0
    gamma2: float = 0.0

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def ansatz(self) -> "FanConstants":
        if self.alpha != 0.0 or self.gamma2 != 0.0:
            raise ValueError("the reduced system requires alpha = gamma2 = 0")
        return self

    @property
    def C1(self) -> float:
        """Trace constant fixed by the K identity: C1 = 2*rho1*K - 4*rho1^2."""
        return 2.0 * self.rho1 * self.K - 4.0 * self.rho1 ** 2


class InterfaceStates(BaseModel):
    """Traces (rho, m2) of the smooth outer solution on both fan boundaries."""

    rho_minus_nu: float = Field(gt=0.0)
    m_minus2_nu: float
    rho_plus_nu: float = Field(gt=0.0)
    m_plus2_nu: float

    model_config = ConfigDict(frozen=True)

    @classmethod
    def baseline(cls) -> "InterfaceStates":
        """Riemann endpoint states (1, sqrt8) and (4, 0)."""
        return cls(rho_minus_nu=1.0, m_minus2_nu=math.sqrt(8.0), rho_plus_nu=4.0, m_plus2_nu=0.0)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.rho_minus_nu, self.m_minus2_nu, self.rho_plus_nu, self.m_plus2_nu)


class InterfaceSolution(BaseModel):
    """Closed-form branch of the reduced Rankine-Hugoniot system."""

    nu_minus: float
    nu_plus: float
    beta: float
    eps2L: float
    eps2R: float
    eps_delta: float
    eps1_left: float
    eps1_right: float
    C1: float
    gamma1_left: float
    gamma1_right: float

    model_config = ConfigDict(frozen=True)

    @property
    def eps1(self) -> float:
        """Smallest value of eps1 across the fan region."""
        return min(self.eps1_left, self.eps1_right)

    @property
    def gamma1(self) -> float:
        return self.gamma1_left


class ShockBounds(BaseModel):
    """Slopes of the rays s-(t) = s_minus_slope*t and s+(t) = s_plus_slope*t."""

    s_minus_slope: float
    s_plus_slope: float

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def ordered(self) -> "ShockBounds":
        if self.s_minus_slope > self.s_plus_slope:
            raise ValueError("s_minus_slope must not exceed s_plus_slope")
        return self


# ============================================================================
# VERIFICATION REPORTS
# ============================================================================

class CheckResult(BaseModel):
    """One named pass/fail check with the measured value."""

    name: str = Field(min_length=1)
    passed: bool
    value: float
    threshold: Optional[float] = None
    detail: str = ""


class VerificationReport(BaseModel):
    """Ordered collection of checks plus named scalar quantities."""

    title: str
    checks: List[CheckResult] = Field(default_factory=list)
    quantities: Dict[str, float] = Field(default_factory=dict)

    def add(
        self,
        name: str,
        passed: bool,
        value: float,
        threshold: Optional[float] = None,
        detail: str = "",
    ) -> CheckResult:
        check = CheckResult(
            name=name, passed=bool(passed), value=float(value), threshold=threshold, detail=detail
        )
        self.checks.append(check)
        return check

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def check(self, name: str) -> CheckResult:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)
