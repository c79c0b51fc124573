"""
End-to-end tests for the command-line driver.
"""

import pandas as pd
import pytest
from loguru import logger

from src.cli import EXIT_CHECK_FAILED, EXIT_CONFIG_ERROR, EXIT_OK, build_parser, main


@pytest.fixture(autouse=True)
def release_log_sinks():
    """main() points loguru at the captured stderr; drop it afterwards."""
    yield
    logger.remove()


def _scenario(tmp_path, text):
    path = tmp_path / "scenario.env"
    path.write_text(text)
    return str(path)


def _run(tmp_path, command, text="", name="out"):
    out = tmp_path / name
    argv = [command, "--out", str(out), "--log-level", "WARNING"]
    if text:
        argv += ["--config", _scenario(tmp_path, text)]
    return main(argv), out


# ============================================================================
# Parser
# ============================================================================

def test_parser_commands():
    args = build_parser().parse_args(["solve-fan", "--refine", "2", "--strict"])
    assert args.command == "solve-fan"
    assert args.refine == 2
    assert args.strict is True


def test_parser_rejects_unknown_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["plot"])


# ============================================================================
# verify-riemann
# ============================================================================

def test_verify_riemann_passes(tmp_path):
    code, out = _run(tmp_path, "verify-riemann")
    assert code == EXIT_OK
    text = (out / "riemann_report.txt").read_text()
    assert "status = PASS" in text
    assert "rh_residual_right_momentum = PASS" in text


def test_verify_riemann_perturbed_k(tmp_path, capsys):
    code, out = _run(tmp_path, "verify-riemann", "K = (58+2sqrt13)/9 + 0.001\n")
    assert code == EXIT_CHECK_FAILED
    assert "rh_residual_right_momentum" in capsys.readouterr().err
    assert "rh_residual_right_momentum = FAIL" in (out / "riemann_report.txt").read_text()


def test_verify_riemann_wrong_fan_density(tmp_path):
    code, out = _run(tmp_path, "verify-riemann", "rho1 = 3\n")
    assert code == EXIT_CHECK_FAILED
    assert "status = FAIL" in (out / "riemann_report.txt").read_text()


def test_degenerate_zeta2_is_a_config_error(tmp_path, capsys):
    code, out = _run(tmp_path, "verify-riemann", "zeta2 = 0\n")
    assert code == EXIT_CONFIG_ERROR
    assert "zeta2" in capsys.readouterr().err
    assert not out.exists()


def test_missing_scenario_file(tmp_path):
    code = main(["verify-riemann", "--config", str(tmp_path / "absent.env"), "--out", str(tmp_path)])
    assert code == EXIT_CONFIG_ERROR


# ============================================================================
# solve-fan and trace-characteristics
# ============================================================================

def test_solve_fan_writes_outputs(tmp_path):
    code, out = _run(tmp_path, "solve-fan", "grid_size = 512\n")
    assert code == EXIT_OK
    table = pd.read_csv(out / "fan_solution.csv")
    assert len(table) == 512
    assert list(table.columns)[:2] == ["t", "eps_delta"]
    assert "contraction = PASS" in (out / "fan_diagnostics.txt").read_text()


def test_solve_fan_refined_strict_defaults(tmp_path):
    out = tmp_path / "out"
    code = main(["solve-fan", "--refine", "2", "--strict", "--out", str(out), "--log-level", "WARNING"])
    assert code == EXIT_OK
    assert len(pd.read_csv(out / "fan_solution.csv")) == 4095
    text = (out / "fan_diagnostics.txt").read_text()
    for name in ("refinement_order", "refinement_error", "bound_constant_drift", "contraction_horizon",
                 "ode_residual", "eps_at_t_min", "margin_sweep"):
        assert f"{name} = PASS" in text


def test_trace_characteristics(tmp_path):
    code, out = _run(tmp_path, "trace-characteristics", "trace_times = 3\ntrace_points = 11\n")
    assert code == EXIT_OK
    table = pd.read_csv(out / "characteristics.csv")
    assert list(table.columns) == ["t", "x2", "lambda1", "rho", "m2"]
    assert len(table) == 33
    assert table["rho"].min() > 0.0


def test_outputs_are_byte_identical(tmp_path):
    """Two runs of one scenario give the same bytes."""
    text = "trace_times = 4\ntrace_points = 21\n"
    first, out_a = _run(tmp_path, "trace-characteristics", text, name="a")
    second, out_b = _run(tmp_path, "trace-characteristics", text, name="b")
    assert first == second == EXIT_OK
    assert (out_a / "characteristics.csv").read_bytes() == (out_b / "characteristics.csv").read_bytes()

    main(["verify-riemann", "--out", str(out_a), "--log-level", "ERROR"])
    main(["verify-riemann", "--out", str(out_b), "--log-level", "ERROR"])
    assert (out_a / "riemann_report.txt").read_bytes() == (out_b / "riemann_report.txt").read_bytes()


# ============================================================================
# build-datum
# ============================================================================

def test_build_datum_writes_outputs(tmp_path):
    code, out = _run(tmp_path, "build-datum", "datum_samples = 101\n")
    assert code == EXIT_OK

    datum = pd.read_csv(out / "datum.csv")
    assert list(datum.columns) == ["x2", "lambda1_0", "rho0", "m2_0"]
    assert len(datum) == 101
    smooth = pd.read_csv(out / "smooth_datum.csv")
    assert list(smooth.columns) == ["x2", "lambda1", "rho", "m2"]
    geometry = pd.read_csv(out / "fan_geometry.csv")
    assert list(geometry.columns) == ["t", "nu_tilde_minus", "nu_tilde_plus", "s_minus", "s_plus"]
    assert "status = PASS" in (out / "datum_report.txt").read_text()
