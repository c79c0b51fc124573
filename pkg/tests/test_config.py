"""
Tests for settings and scenario configuration.
"""

import math

import pytest
from pydantic import ValidationError

from src.core.config import K_DEFAULT, ScenarioConfig, Settings, load_scenario, parse_token
from src.core.exceptions import ConfigError


# ============================================================================
# Symbolic tokens
# ============================================================================

def test_parse_token_decimals():
    """Plain decimals and exponents pass through unchanged."""
    assert parse_token("0.05") == 0.05
    assert parse_token("1e-8") == 1e-8
    assert parse_token(3) == 3.0


def test_parse_token_square_roots():
    """sqrtN and ksqrtN expand to full-precision products."""
    assert parse_token("sqrt2") == math.sqrt(2.0)
    assert parse_token("-2sqrt2") == -2.0 * math.sqrt(2.0)
    assert parse_token("4sqrt2") == 4.0 * math.sqrt(2.0)


def test_parse_token_expression():
    """The fan energy constant is written exactly."""
    assert parse_token("(58+2sqrt13)/9") == pytest.approx(K_DEFAULT, rel=1e-15)
    assert parse_token("(58+2sqrt13)/9") == pytest.approx(7.2457, abs=1e-4)


@pytest.mark.parametrize("token", ["", "abc", "sqrt(-1)", "__import__('os')", "2**3", "1/0x"])
def test_parse_token_rejects_garbage(token):
    """Anything outside the small arithmetic grammar is refused."""
    with pytest.raises((ValueError, ZeroDivisionError)):
        parse_token(token)


def test_parse_token_rejects_bool():
    with pytest.raises(ValueError):
        parse_token(True)


# ============================================================================
# Defaults and validation
# ============================================================================

def test_default_scenario():
    """Defaults reproduce the standard compression-wave scenario."""
    cfg = ScenarioConfig()
    assert cfg.lambda_minus == math.sqrt(2.0)
    assert cfg.lambda_plus == -2.0 * math.sqrt(2.0)
    assert cfg.w1 == 4.0 * math.sqrt(2.0)
    assert cfg.T == 1.0
    assert cfg.zeta1 == 0.3
    assert cfg.zeta2_over_T == 0.05
    assert cfg.zeta_bar == pytest.approx(0.075)
    assert cfg.delta < cfg.delta_prime
    assert cfg.T_end == cfg.delta_prime


def test_refined_grid_nests_coarse_grid():
    cfg = ScenarioConfig(grid_size=2048, refine=2)
    assert cfg.refined_grid_size == 4095
    assert ScenarioConfig(grid_size=2048).refined_grid_size == 2048


def test_zeta2_zero_rejected():
    """Degenerate traces are refused at load time."""
    with pytest.raises(ConfigError) as exc_info:
        load_scenario(zeta2=0.0)
    assert "zeta2" in str(exc_info.value)


def test_t_end_beyond_half_rejected():
    with pytest.raises(ConfigError) as exc_info:
        load_scenario(T_end=0.6, delta_prime=0.7)
    assert "T_end" in str(exc_info.value)


def test_zeta_ordering_rejected():
    with pytest.raises(ValidationError):
        ScenarioConfig(zeta1=0.1, zeta2=0.2)


def test_delta_ordering_rejected():
    with pytest.raises(ValidationError):
        ScenarioConfig(delta=0.05, delta_prime=0.02)


def test_vacuum_rejected():
    with pytest.raises(ValidationError):
        ScenarioConfig(w1=1.0)


# ============================================================================
# Scenario files and environment
# ============================================================================

def test_load_scenario_file(tmp_path):
    """Files hold key = value lines with symbolic tokens."""
    path = tmp_path / "scenario.env"
    path.write_text("K = (58+2sqrt13)/9 + 0.001\nzeta2 = 0.04\ngrid_size = 512\n")

    cfg = load_scenario(path)

    assert cfg.K == pytest.approx(K_DEFAULT + 1e-3, rel=1e-15)
    assert cfg.zeta2 == 0.04
    assert cfg.grid_size == 512


def test_overrides_win_over_file(tmp_path):
    path = tmp_path / "scenario.env"
    path.write_text("refine = 1\noutput_dir = from_file\n")

    cfg = load_scenario(path, refine=2, output_dir="from_flag", strict=None)

    assert cfg.refine == 2
    assert cfg.output_dir == "from_flag"
    assert cfg.strict is False


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "scenario.env"
    path.write_text("zeta3 = 0.1\n")
    with pytest.raises(ConfigError, match="zeta3"):
        load_scenario(path)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "absent.env")


def test_environment_override(monkeypatch):
    """WILD_<KEY> variables feed the scenario."""
    monkeypatch.setenv("WILD_GRID_SIZE", "256")
    assert ScenarioConfig().grid_size == 256


# ============================================================================
# Application settings
# ============================================================================

def test_settings_log_level_uppercased():
    assert Settings(log_level="debug").log_level == "DEBUG"


def test_settings_log_level_invalid():
    with pytest.raises(ValidationError):
        Settings(log_level="LOUD")
