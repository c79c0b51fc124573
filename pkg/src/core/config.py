"""
Configuration management for the wild-data toolkit.

Two layers live here:
- Settings: application-level knobs (logging, metadata) loaded from the
  environment and an optional .env file.
- ScenarioConfig: every numerical tunable of one run (collapse time, wave
  widths, trace window, Picard grid, tolerances). Scenario files are flat
  ``key = value`` text parsed with python-dotenv; values may be exact
  decimals or symbolic tokens such as ``sqrt2``, ``-2sqrt2`` or
  ``(58+2sqrt13)/9`` which are evaluated to full double precision.

Philosophy:
- Fail fast: invalid orderings are rejected at load with the field named
- Irrational constants are never truncated at the config level
- Defaults reproduce the standard compression-wave scenario
"""

import ast
import math
import operator
import re
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional, Union

from dotenv import dotenv_values
from pydantic import Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.core.exceptions import ConfigError


# ============================================================================
# APPLICATION SETTINGS
# ============================================================================

class Settings(BaseSettings):
    """
    Application settings loaded from environment variables.

    Only cross-cutting concerns live here; numerical parameters belong to
    ScenarioConfig so that a run is fully described by its scenario file.
    """

    app_name: str = Field(
        default="Wild Data Toolkit",
        description="Application name"
    )

    app_version: str = Field(
        default="0.1.0",
        description="Application version"
    )

    log_level: str = Field(
        default="INFO",
        description="Logging level (DEBUG, INFO, WARNING, ERROR)"
    )

    log_retention_days: int = Field(
        default=7,
        ge=1,
        description="How many days to keep log files"
    )

    log_dir: str = Field(
        default="data/logs",
        description="Directory for rotated log files"
    )

    log_to_file: bool = Field(
        default=True,
        description="Write rotated log files next to the console output"
    )

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    @field_validator('log_level')
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Ensure log level is valid."""
        allowed_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        v_upper = v.upper()

        if v_upper not in allowed_levels:
            raise ValueError(
                f"log_level must be one of {allowed_levels}, got '{v}'"
            )

        return v_upper


@lru_cache()
def get_settings() -> Settings:
    """
    Get application settings (cached singleton).

    Returns:
        Settings: Validated application settings
    """
    return Settings()


settings = get_settings()


# ============================================================================
# SYMBOLIC TOKENS
# ============================================================================

# "2sqrt13" -> "(2*sqrt(13))", "sqrt2" -> "sqrt(2)"
_SQRT_TOKEN = re.compile(r"(\d+(?:\.\d+)?)?sqrt(\d+(?:\.\d+)?)")

_BINARY_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
}

_UNARY_OPS = {
    ast.UAdd: operator.pos,
    ast.USub: operator.neg,
}


def _expand_sqrt(match: re.Match) -> str:
    factor, radicand = match.group(1), match.group(2)
    if factor:
        return f"({factor}*sqrt({radicand}))"
    return f"sqrt({radicand})"


def _evaluate_node(node: ast.AST) -> float:
    if isinstance(node, ast.Expression):
        return _evaluate_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINARY_OPS:
        return _BINARY_OPS[type(node.op)](
            _evaluate_node(node.left), _evaluate_node(node.right)
        )
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY_OPS:
        return _UNARY_OPS[type(node.op)](_evaluate_node(node.operand))
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id == "sqrt"
        and len(node.args) == 1
        and not node.keywords
    ):
        radicand = _evaluate_node(node.args[0])
        if radicand < 0:
            raise ValueError(f"sqrt of negative number {radicand}")
        return math.sqrt(radicand)
    raise ValueError(f"unsupported element in numeric token: {ast.dump(node)}")


def parse_token(token: Union[str, int, float]) -> float:
    """
    Evaluate a numeric or symbolic scenario token.

    Accepted grammar: decimals (including exponent notation), ``sqrtN``,
    ``kSqrtN`` written as ``ksqrtN``, parentheses and the operators
    ``+ - * /``. Anything else is rejected.

    Example:
        >>> parse_token("(58+2sqrt13)/9")
        7.245680...
    """
    if isinstance(token, bool):
        raise ValueError("booleans are not numeric tokens")
    if isinstance(token, (int, float)):
        return float(token)

    text = token.strip().replace(" ", "")
    if not text:
        raise ValueError("empty numeric token")

    expanded = _SQRT_TOKEN.sub(_expand_sqrt, text)
    try:
        tree = ast.parse(expanded, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse numeric token '{token}'") from exc

    value = _evaluate_node(tree)
    if not math.isfinite(value):
        raise ValueError(f"numeric token '{token}' is not finite")
    return value


# ============================================================================
# SCENARIO CONFIGURATION
# ============================================================================

SQRT2 = math.sqrt(2.0)
K_DEFAULT = (58.0 + 2.0 * math.sqrt(13.0)) / 9.0

_FLOAT_FIELDS = (
    "lambda_minus", "lambda_plus", "w1", "rho1", "K",
    "T", "zeta1", "zeta2", "zeta_bar", "delta", "delta_prime",
    "a_plus", "a_minus", "h_slope_minus", "h_slope_plus",
    "T_end", "t_min", "tol", "root_tolerance", "eps_bar", "delta_hat",
    "pullback_min", "refine_tol",
)


class ScenarioConfig(BaseSettings):
    """
    All tunables of one run.

    Values come from a scenario file (highest priority), then from
    ``WILD_<KEY>`` environment variables, then from the defaults below.
    """

    # Riemann endpoint data and fan constants
    lambda_minus: float = Field(default=SQRT2, description="Left far-field speed")
    lambda_plus: float = Field(default=-2.0 * SQRT2, description="Right far-field speed")
    w1: float = Field(default=4.0 * SQRT2, description="Constant Riemann invariant w1")
    rho1: float = Field(default=2.0, gt=0.0, description="Density in the fan region")
    K: float = Field(default=K_DEFAULT, gt=0.0, description="Energy flux constant of the fan")

    # Compression wave geometry
    T: float = Field(default=1.0, gt=0.0, description="Collapse time")
    zeta1: float = Field(default=0.3, gt=0.0, lt=1.0, description="Outer transition width")
    zeta2: float = Field(default=0.05, gt=0.0, lt=1.0, description="Inner transition width")
    zeta_bar: Optional[float] = Field(
        default=None, gt=0.0, description="Pure-f0 radius (defaults to zeta1/4)"
    )
    a_plus: float = Field(default=0.05, gt=0.0, description="Right composite amplitude")
    a_minus: float = Field(default=0.05, gt=0.0, description="Left composite amplitude")
    h_slope_minus: float = Field(default=-1.0, lt=0.0, description="Slope of h- at 0")
    h_slope_plus: float = Field(default=1.0, gt=0.0, description="Slope of h+ at 0")

    # Boundary-trace window
    delta: float = Field(default=0.02, gt=0.0, description="End of the pure-f0 trace window")
    delta_prime: float = Field(default=0.05, gt=0.0, description="End of the trace bridge")

    # Picard solver
    T_end: float = Field(default=0.05, gt=0.0, description="Right end of the time grid")
    t_min: float = Field(default=1e-8, gt=0.0, description="Left end of the time grid")
    grid_size: int = Field(default=2048, ge=16, description="Number of log-spaced grid points")
    tol: float = Field(default=1e-10, gt=0.0, description="Picard sup-distance tolerance")
    max_iterations: int = Field(default=50, ge=1, description="Picard iteration budget")
    eps_bar: float = Field(default=0.1, gt=0.0, description="Admissible |eps_delta| range")
    delta_hat: float = Field(default=0.01, gt=0.0, description="Closeness radius around baseline")

    # Root finding and sampling
    root_tolerance: float = Field(default=1e-10, gt=0.0, description="Characteristic root tolerance")
    pullback_min: float = Field(default=1e-8, gt=0.0, description="Smallest |x2| sampled by pullback")
    pullback_per_decade: int = Field(default=16, ge=4, description="Pullback samples per decade")
    datum_samples: int = Field(default=801, ge=11, description="Rows in the datum export")
    round_trip_points: int = Field(default=41, ge=2, description="Times in the round-trip check")
    trace_times: int = Field(default=11, ge=2, description="Time rows for trace-characteristics")
    trace_points: int = Field(default=201, ge=3, description="Space columns for trace-characteristics")

    # Run control
    refine: int = Field(default=1, ge=1, description="Grid refinement multiplier")
    refine_tol: float = Field(
        default=2e-5, gt=0.0, description="Bound on the estimated error of a refined solve"
    )
    strict: bool = Field(default=False, description="Treat diagnostic sweeps as fatal")
    output_dir: str = Field(default="output", description="Directory for run outputs")

    model_config = SettingsConfigDict(
        env_prefix="WILD_",
        case_sensitive=False,
        extra="forbid",
    )

    @field_validator(*_FLOAT_FIELDS, mode="before")
    @classmethod
    def parse_symbolic(cls, v: Any) -> Any:
        """Turn symbolic tokens into floats before type validation."""
        if v is None or isinstance(v, (int, float)):
            return v
        if isinstance(v, str):
            if v.strip().lower() in ("", "none"):
                return None
            return parse_token(v)
        return v

    @model_validator(mode="after")
    def check_orderings(self) -> "ScenarioConfig":
        """Cross-field constraints of the whole pipeline."""
        if self.zeta_bar is None:
            self.zeta_bar = self.zeta1 / 4.0
        if not self.zeta2 < self.zeta1:
            raise ValueError(f"zeta2 must be smaller than zeta1, got {self.zeta2} >= {self.zeta1}")
        if not self.zeta_bar < self.zeta1 / 2.0:
            raise ValueError(f"zeta_bar must be smaller than zeta1/2, got {self.zeta_bar}")
        if not self.lambda_minus > self.lambda_plus:
            raise ValueError("lambda_minus must exceed lambda_plus for a compression wave")
        if not self.lambda_minus - self.lambda_plus > 2.0 * self.zeta2 / self.T:
            raise ValueError(
                "zeta2 too large: lambda_minus - lambda_plus must exceed 2*zeta2/T"
            )
        if not self.w1 > self.lambda_minus:
            raise ValueError("w1 must exceed lambda_minus (vacuum excluded)")
        if not self.delta < self.delta_prime < 1.0:
            raise ValueError(
                f"delta must be smaller than delta_prime < 1, got {self.delta}, {self.delta_prime}"
            )
        if not self.t_min < self.T_end:
            raise ValueError(f"t_min must be smaller than T_end, got {self.t_min} >= {self.T_end}")
        if self.T_end > min(self.delta_prime, 0.5):
            raise ValueError(
                f"T_end must not exceed min(delta_prime, 1/2), got {self.T_end}"
            )
        if not self.pullback_min < self.zeta1:
            raise ValueError("pullback_min must be smaller than zeta1")
        return self

    @property
    def zeta2_over_T(self) -> float:
        return self.zeta2 / self.T

    @property
    def refined_grid_size(self) -> int:
        """Grid size after refinement; refined grids nest the coarse one."""
        return (self.grid_size - 1) * self.refine + 1


def _normalise_keys(raw: dict) -> dict:
    by_lower = {name.lower(): name for name in ScenarioConfig.model_fields}
    values = {}
    for key, value in raw.items():
        name = by_lower.get(key.strip().lower())
        if name is None:
            raise ConfigError(f"unknown scenario key '{key}'")
        values[name] = value
    return values


def load_scenario(path: Optional[Union[str, Path]] = None, **overrides: Any) -> ScenarioConfig:
    """
    Load and validate a scenario.

    Args:
        path: Optional ``key = value`` scenario file
        **overrides: Values that win over the file (CLI flags)

    Returns:
        Validated ScenarioConfig

    Raises:
        ConfigError: unreadable file, unknown key or failed validation
    """
    values: dict = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"scenario file not found: {path}")
        values.update(_normalise_keys(dotenv_values(path)))

    values.update({k: v for k, v in overrides.items() if v is not None})

    try:
        return ScenarioConfig(**values)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'scenario'}: {err['msg']}"
            for err in exc.errors()
        )
        raise ConfigError(problems) from exc
