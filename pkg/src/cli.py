"""
Command-line driver for the wild-data toolkit.

Usage:
    python -m src.cli verify-riemann [--config scenario.env] [--out DIR]
    python -m src.cli solve-fan [--refine N] [--strict]
    python -m src.cli build-datum
    python -m src.cli trace-characteristics

Exit codes: 0 all checks pass, 2 a check or pipeline step failed,
3 the scenario could not be loaded.

Philosophy:
- One scenario in, deterministic files out
- Failed checks are named on stderr and in the report file
- Logs go to stderr so stdout stays machine-readable
"""

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from src.core.burgers import CharSolution, euler_fields, sample_solution, shock_bounds
from src.core.config import ScenarioConfig, load_scenario
from src.core.exceptions import ConfigError, WildDataError
from src.core.initial_data import (
    FanPartition,
    build_initial_datum,
    datum_report,
    fan_curves,
    pullback_h,
)
from src.core.models import F0Params, FanConstants, HSpec, ProfileMode, Side, VerificationReport
from src.core.ode_epsilon import (
    MIN_REFINEMENT_ORDER,
    EpsDeltaSolution,
    TraceSpec,
    contraction_horizon,
    fan_diagnostics,
    picard_solve,
    refinement_study,
)
from src.core.profiles import build_compression_datum
from src.core.reporting import write_report, write_table
from src.core.subsolution import verify_riemann_subsolution
from src.utils.logger import get_logger, setup_logger

logger = get_logger()

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_CONFIG_ERROR = 3


# ============================================================================
# SHARED PIPELINE
# ============================================================================

@dataclass
class FanRun:
    """Everything solve-fan produces; build-datum continues from it."""

    cfg: ScenarioConfig
    spec: TraceSpec
    consts: FanConstants
    solution: EpsDeltaSolution
    fan: FanPartition
    report: VerificationReport


def _constants(cfg: ScenarioConfig) -> FanConstants:
    return FanConstants(rho1=cfg.rho1, K=cfg.K)


def run_fan(cfg: ScenarioConfig) -> FanRun:
    """Traces, Picard solve, fan curves and diagnostics for one scenario."""
    spec = TraceSpec.from_config(cfg)
    consts = _constants(cfg)
    solution = picard_solve(
        spec, consts, cfg.T_end, cfg.refined_grid_size, cfg.tol,
        t_min=cfg.t_min, max_iterations=cfg.max_iterations,
    )
    report = fan_diagnostics(
        solution, spec, consts, cfg.tol,
        eps_bar=cfg.eps_bar, delta_hat=cfg.delta_hat, strict=cfg.strict,
    )

    horizon = contraction_horizon(
        spec, consts, cfg.grid_size, cfg.tol,
        t_min=cfg.t_min, max_iterations=cfg.max_iterations,
    )
    report.quantities["contraction_horizon"] = horizon
    report.add("contraction_horizon", horizon >= cfg.T_end, horizon, cfg.T_end)

    if cfg.refine > 1:
        study = refinement_study(
            spec, consts, cfg.T_end, cfg.grid_size, cfg.tol, refine=cfg.refine,
            t_min=cfg.t_min, max_iterations=cfg.max_iterations, fine=solution,
        )
        report.quantities["refinement_d1"] = study.sup_differences[0]
        report.quantities["refinement_d2"] = study.sup_differences[1]
        report.add(
            "refinement_order",
            study.observed_order >= MIN_REFINEMENT_ORDER,
            study.observed_order,
            MIN_REFINEMENT_ORDER,
        )
        error = study.error_estimate
        report.add("refinement_error", error < cfg.refine_tol, error, cfg.refine_tol)
        drift = study.bound_constant_drift
        report.add("bound_constant_drift", drift < 0.1, drift, 0.1)

    fan = fan_curves(solution, spec, consts)
    return FanRun(cfg=cfg, spec=spec, consts=consts, solution=solution, fan=fan, report=report)


def _finish(report: VerificationReport, path: Path) -> int:
    write_report(report, path)
    if report.passed:
        logger.info("All checks passed", report=report.title, path=str(path))
        return EXIT_OK
    failures = report.failures()
    logger.error("Checks failed", report=report.title, failures=failures)
    print(f"FAILED: {', '.join(failures)}", file=sys.stderr)
    return EXIT_CHECK_FAILED


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_verify_riemann(cfg: ScenarioConfig, out: Path) -> int:
    report = verify_riemann_subsolution(
        consts=_constants(cfg),
        zeta2_over_T=cfg.zeta2_over_T,
        lambda_minus=cfg.lambda_minus,
        lambda_plus=cfg.lambda_plus,
        w1=cfg.w1,
    )
    return _finish(report, out / "riemann_report.txt")


def cmd_solve_fan(cfg: ScenarioConfig, out: Path) -> int:
    run = run_fan(cfg)
    write_table(run.solution.table(), out / "fan_solution.csv")
    return _finish(run.report, out / "fan_diagnostics.txt")


def cmd_build_datum(cfg: ScenarioConfig, out: Path) -> int:
    run = run_fan(cfg)
    spec, fan = run.spec, run.fan
    left = pullback_h(Side.LEFT, fan, spec, run.consts, cfg.pullback_min, cfg.pullback_per_decade)
    right = pullback_h(Side.RIGHT, fan, spec, run.consts, cfg.pullback_min, cfg.pullback_per_decade)
    datum = build_initial_datum(left, right, spec, fan, zeta1=cfg.zeta1, T=cfg.T)

    xs = np.linspace(-2.0 * cfg.zeta1, 2.0 * cfg.zeta1, cfg.datum_samples)
    write_table(datum.table(xs), out / "datum.csv")
    reach = cfg.zeta1 + cfg.T * max(abs(cfg.lambda_minus), abs(cfg.lambda_plus))
    smooth_xs = np.linspace(-reach, reach, cfg.datum_samples)
    write_table(datum.smooth_table(smooth_xs), out / "smooth_datum.csv")

    bounds = shock_bounds(cfg.lambda_minus, cfg.lambda_plus, cfg.zeta2, cfg.T)
    write_table(fan.table(run.solution.grid, bounds), out / "fan_geometry.csv")

    times = np.geomspace(1e-4, cfg.delta, cfg.round_trip_points)
    report = datum_report(datum, fan, spec, times, cfg.zeta1)
    if not run.report.passed:
        report.add("fan_diagnostics", False, float(len(run.report.failures())), 0.0,
                   detail=",".join(run.report.failures()))
    return _finish(report, out / "datum_report.txt")


def cmd_trace_characteristics(cfg: ScenarioConfig, out: Path) -> int:
    f0p = F0Params.from_wave(
        cfg.lambda_minus, cfg.lambda_plus, cfg.T, cfg.zeta2, cfg.a_plus, cfg.a_minus, cfg.zeta_bar
    )
    profile = build_compression_datum(
        cfg.lambda_minus, cfg.lambda_plus, cfg.T, cfg.zeta1, cfg.zeta2, f0p,
        h_spec=HSpec(slope_minus=cfg.h_slope_minus, slope_plus=cfg.h_slope_plus),
        mode=ProfileMode.INITIAL,
    )
    sol = CharSolution(profile=profile, root_tolerance=cfg.root_tolerance)

    times = np.linspace(0.0, cfg.T, cfg.trace_times, endpoint=False)
    reach = cfg.zeta1 + cfg.T * max(abs(cfg.lambda_minus), abs(cfg.lambda_plus))
    xs = np.linspace(-reach, reach, cfg.trace_points)
    table = euler_fields(sample_solution(sol, times, xs), cfg.w1)
    write_table(table, out / "characteristics.csv")
    logger.info("Characteristics sampled", rows=len(table), times=len(times), points=len(xs))
    return EXIT_OK


COMMANDS = {
    "verify-riemann": cmd_verify_riemann,
    "solve-fan": cmd_solve_fan,
    "build-datum": cmd_build_datum,
    "trace-characteristics": cmd_trace_characteristics,
}


# ============================================================================
# ENTRY POINT
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wild-data",
        description="Wild initial data for 2-D isentropic Euler with p = rho^2.",
    )
    ap.add_argument("command", choices=sorted(COMMANDS), help="Pipeline stage to run.")
    ap.add_argument("--config", type=str, default=None, help="Scenario file of key = value lines.")
    ap.add_argument("--out", type=str, default=None, help="Output directory (overrides output_dir).")
    ap.add_argument("--refine", type=int, default=None, help="Grid refinement multiplier.")
    ap.add_argument("--strict", action="store_true", help="Treat the margin sweep as a failing check.")
    ap.add_argument("--log-level", type=str, default=None, help="DEBUG, INFO, WARNING or ERROR.")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logger(sink=sys.stderr, level=args.log_level, to_file=False)

    try:
        cfg = load_scenario(
            args.config,
            output_dir=args.out,
            refine=args.refine,
            strict=True if args.strict else None,
        )
    except ConfigError as exc:
        logger.error("Invalid scenario", error=str(exc))
        print(f"CONFIG ERROR: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    logger.info("Running command", command=args.command, output_dir=str(out))

    try:
        return COMMANDS[args.command](cfg, out)
    except WildDataError as exc:
        logger.error("Pipeline step failed", command=args.command, error=type(exc).__name__, detail=str(exc))
        print(f"FAILED: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
