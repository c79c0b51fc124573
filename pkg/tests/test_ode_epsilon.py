"""
Tests for the boundary traces and the Picard solve of the eps_delta equation.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.core.exceptions import ContractionError, DomainError, GeometryError
from src.core.models import FanConstants, Side, TraceShape
from src.core.ode_epsilon import (
    EPS_ORIGIN_BOUND,
    MIN_REFINEMENT_ORDER,
    PicardProblem,
    TraceSpec,
    boundary_traces,
    check_traces,
    contraction_horizon,
    coeff_f,
    coeff_g,
    coeff_g_fd,
    fan_diagnostics,
    length_l,
    margin_horizon,
    picard_solve,
    refinement_study,
    trace_speed,
)
from src.core.profiles import f0_eval

SQRT2 = math.sqrt(2.0)


# ============================================================================
# Boundary traces
# ============================================================================

def test_trace_inner_form(trace_spec):
    """On (0, delta) the traces are lambda -+ zeta2/T +- a f0(t)."""
    t = 0.01
    assert trace_speed(t, trace_spec, Side.LEFT) == pytest.approx(SQRT2 - 0.05 + 0.05 * f0_eval(t), abs=1e-14)
    assert trace_speed(t, trace_spec, Side.RIGHT) == pytest.approx(-2 * SQRT2 + 0.05 - 0.05 * f0_eval(t), abs=1e-14)


def test_trace_plateau_exact_beyond_delta_prime(trace_spec):
    for t in (0.05, 0.07, 0.4):
        assert trace_speed(t, trace_spec, Side.LEFT) == SQRT2
        assert trace_speed(t, trace_spec, Side.RIGHT) == -2 * SQRT2
        assert trace_speed(t, trace_spec, Side.LEFT, order=1) == 0.0


def test_trace_continuous_at_delta(trace_spec):
    below = trace_speed(0.02 * (1 - 1e-12), trace_spec, Side.LEFT)
    assert trace_speed(0.02, trace_spec, Side.LEFT) == pytest.approx(below, abs=1e-10)


def test_trace_derivative_matches_difference(trace_spec):
    t, h = 0.03, 1e-7
    fd = (trace_speed(t + h, trace_spec, Side.RIGHT) - trace_speed(t - h, trace_spec, Side.RIGHT)) / (2 * h)
    assert trace_speed(t, trace_spec, Side.RIGHT, order=1) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("t", [0.0, -0.01])
def test_trace_domain(trace_spec, t):
    with pytest.raises(DomainError):
        trace_speed(t, trace_spec, Side.LEFT)
    with pytest.raises(DomainError):
        boundary_traces(t, trace_spec)


def test_trace_order_checked(trace_spec):
    with pytest.raises(DomainError):
        trace_speed(0.01, trace_spec, Side.LEFT, order=3)


def test_boundary_traces_near_baseline(trace_spec):
    states = boundary_traces(1e-6, trace_spec)
    assert 1.0 < states.rho_minus_nu < 2.0
    assert states.rho_plus_nu > 2.0
    plateau = boundary_traces(0.3, trace_spec)
    assert plateau.rho_minus_nu == pytest.approx(1.0, abs=1e-14)
    assert plateau.rho_plus_nu == pytest.approx(4.0, abs=1e-14)


def test_trace_spec_rejects_large_amplitude():
    with pytest.raises(ValidationError, match="amplitude_minus"):
        TraceSpec(amplitude_minus=1.0)


def test_trace_spec_rejects_window():
    with pytest.raises(ValidationError):
        TraceSpec(delta=0.05, delta_prime=0.02)


def test_trace_spec_from_config(scenario):
    spec = TraceSpec.from_config(scenario)
    assert spec.zeta2_over_T == 0.05
    assert spec.delta == scenario.delta
    assert spec.amplitude_plus == scenario.a_plus


def test_check_traces(trace_spec, consts):
    check_traces(trace_spec, consts, samples=257)
    with pytest.raises(GeometryError, match="ordering"):
        check_traces(trace_spec, FanConstants(rho1=1.0), samples=257)


# ============================================================================
# Coefficients
# ============================================================================

@pytest.mark.parametrize("t", [1e-4, 0.01, 0.03])
def test_g_closed_form_matches_differences(trace_spec, consts, t):
    assert coeff_g(t, 0.0, trace_spec, consts) == pytest.approx(
        coeff_g_fd(t, 0.0, trace_spec, consts), rel=1e-5, abs=1e-10
    )


def test_g_vanishes_on_plateau(trace_spec, consts):
    assert coeff_g(0.2, 0.0, trace_spec, consts) == 0.0


def test_f_positive(trace_spec, consts):
    assert coeff_f(0.01, 0.0, trace_spec, consts) > 0.0


@pytest.mark.parametrize("t", [1e-6, 1e-3, 0.02, 0.05])
def test_length_band(trace_spec, consts, t):
    """The fan widens at a rate between 2 and 3."""
    ratio = length_l(t, None, trace_spec, consts) / t
    assert 2.0 < ratio < 3.0


def test_length_domain(trace_spec, consts):
    with pytest.raises(DomainError):
        length_l(0.0, None, trace_spec, consts)


# ============================================================================
# Picard iteration
# ============================================================================

def test_picard_converges(fan_solution):
    assert fan_solution.sup_distances[-1] < 1e-10
    assert all(q < 1.0 for q in fan_solution.contraction_ratios[1:])
    assert fan_solution.t_min == pytest.approx(1e-8)
    assert fan_solution.grid[-1] == 0.05


def test_eps_small_near_zero(fan_solution):
    assert abs(fan_solution.values[0]) < 1e-2
    assert math.isfinite(fan_solution.bound_constant())


def test_fan_diagnostics_pass(fan_solution, trace_spec, consts):
    report = fan_diagnostics(fan_solution, trace_spec, consts, tol=1e-10)
    assert report.passed, report.failures()
    assert report.quantities["delta0"] == 0.05
    assert report.quantities["length_rate_min"] > 2.0


def test_fan_diagnostics_residual_at_solver_tolerance(fan_solution, trace_spec, consts):
    report = fan_diagnostics(fan_solution, trace_spec, consts, tol=1e-10)
    check = report.check("ode_residual")
    assert check.passed
    assert check.threshold == pytest.approx(1e-9)
    assert check.value < 1e-9


def test_fan_diagnostics_eps_at_t_min(fan_solution, trace_spec, consts):
    check = fan_diagnostics(fan_solution, trace_spec, consts, tol=1e-10).check("eps_at_t_min")
    assert check.passed
    assert check.threshold == EPS_ORIGIN_BOUND
    assert check.value == pytest.approx(abs(fan_solution.values[0]))


def test_step_residual_vanishes_at_fixed_point(fan_solution, trace_spec, consts):
    problem = PicardProblem.build(trace_spec, consts, 0.05, 2048, 1e-8)
    residual = problem.step_residual(np.asarray(fan_solution.values))
    assert residual.shape == (2047,)
    assert np.max(np.abs(residual)) < 1e-9
    assert np.max(np.abs(problem.step_residual(np.zeros(2048)))) > 1e-6


def test_picard_problem_is_frozen(trace_spec, consts):
    problem = PicardProblem.build(trace_spec, consts, 0.05, 64, 1e-8)
    with pytest.raises(ValidationError):
        problem.t = np.ones(64)


def test_eps_vanishes_toward_origin(trace_spec, consts):
    """|eps_delta(t_min)| shrinks as the grid reaches closer to t = 0."""
    values = [
        abs(picard_solve(trace_spec, consts, T_end=0.05, grid_size=2048, tol=1e-10, t_min=t_min).values[0])
        for t_min in (1e-6, 1e-8, 1e-10)
    ]
    assert values[0] > values[1] > values[2]
    assert values[-1] < EPS_ORIGIN_BOUND


def test_contraction_horizon_reaches_window(trace_spec, consts):
    assert contraction_horizon(trace_spec, consts, grid_size=512, tol=1e-10) == pytest.approx(0.05)


def test_contraction_horizon_zero_without_convergence(trace_spec, consts):
    horizon = contraction_horizon(trace_spec, consts, grid_size=64, tol=1e-10, max_iterations=1)
    assert horizon == 0.0


def test_refinement_study_is_second_order(trace_spec, consts):
    study = refinement_study(trace_spec, consts, T_end=0.05, grid_size=513, tol=1e-10, refine=2)
    assert study.grid_sizes == [513, 1025, 2049]
    d1, d2 = study.sup_differences
    assert d1 > d2 > 0.0
    assert study.observed_order > MIN_REFINEMENT_ORDER
    assert study.error_estimate < d1
    assert study.bound_constant_drift < 0.1


def test_refinement_study_needs_multiplier(trace_spec, consts):
    with pytest.raises(DomainError, match="refine"):
        refinement_study(trace_spec, consts, T_end=0.05, grid_size=64, tol=1e-10, refine=1)


def test_margin_horizon_covers_grid(fan_solution):
    assert margin_horizon(fan_solution) == fan_solution.grid[-1]


def test_solution_interpolation(fan_solution):
    assert fan_solution(1e-12) == 0.0
    assert fan_solution(0.05) == fan_solution.values[-1]
    assert np.shape(fan_solution(np.array([1e-6, 1e-3]))) == (2,)


def test_solution_table(fan_solution):
    table = fan_solution.table()
    assert list(table.columns)[:2] == ["t", "eps_delta"]
    assert len(table) == 2048


def test_plateau_traces_converge_at_once(consts):
    """Constant traces give g = 0, so eps_delta = 0 is reached immediately."""
    spec = TraceSpec(shape=TraceShape.PLATEAU)
    solution = picard_solve(spec, consts, T_end=0.05, grid_size=64, tol=1e-12)
    assert solution.iterations == 1
    assert max(abs(v) for v in solution.values) == 0.0


def test_t_end_beyond_window_rejected(trace_spec, consts):
    with pytest.raises(DomainError, match="T_end"):
        picard_solve(trace_spec, consts, T_end=0.06, grid_size=64, tol=1e-10)


def test_non_positive_tolerance_rejected(trace_spec, consts):
    with pytest.raises(DomainError):
        picard_solve(trace_spec, consts, T_end=0.05, grid_size=64, tol=0.0)


def test_iteration_budget_exhausted(trace_spec, consts):
    with pytest.raises(ContractionError, match="no convergence"):
        picard_solve(trace_spec, consts, T_end=0.05, grid_size=64, tol=1e-30, max_iterations=1)
