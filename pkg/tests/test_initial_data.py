"""
Tests for the fan curves, the pullback maps and the reconstructed datum.
"""

import math

import numpy as np
import pytest

from src.core.burgers import shock_bounds
from src.core.exceptions import DomainError, GeometryError
from src.core.initial_data import (
    FanCurve,
    PullbackMap,
    build_initial_datum,
    datum_report,
    derivative_decay,
    hypothesis_check,
    limit_slope,
    pullback_h,
    round_trip,
)
from src.core.models import Side
from src.core.ode_epsilon import length_l, trace_speed
from src.core.profiles import f0_eval

SQRT2 = math.sqrt(2.0)


# ============================================================================
# Fan curves
# ============================================================================

def test_constant_speed_curve_is_a_ray():
    """Frozen interface speeds integrate to nu * t."""
    grid = np.geomspace(1e-6, 0.05, 2048).tolist()
    curve = FanCurve(side=Side.LEFT, grid=grid, speeds=[-2.6] * 2048)
    for s in (1e-7, 1e-4, 0.01, 0.05):
        assert curve.position(s) == pytest.approx(-2.6 * s, rel=1e-5)
    assert curve.position(0.0) == 0.0
    assert curve.speed(0.02) == pytest.approx(-2.6, rel=1e-5)


def test_curve_extends_linearly_past_grid():
    grid = np.geomspace(1e-6, 0.05, 256).tolist()
    curve = FanCurve(side=Side.RIGHT, grid=grid, speeds=[0.5] * 256)
    end = curve.position(0.05)
    assert curve.position(0.06) == pytest.approx(end + 0.01 * curve.speed(0.05), rel=1e-12)
    assert curve.acceleration(0.06) == 0.0


def test_curve_rejects_negative_time(fan):
    with pytest.raises(DomainError):
        fan.left.position(-1e-3)


def test_fan_curves_enclose_shock_cone(fan):
    bounds = shock_bounds(SQRT2, -2 * SQRT2, 0.05, 1.0)
    check = fan.sandwich(bounds)
    assert check.passed
    assert check.name == "fan_sandwich"
    left, right = fan.positions(0.01)
    assert left < right


def test_fan_width_matches_length(fan, fan_solution, trace_spec, consts):
    for s in (1e-3, 0.02, 0.05):
        assert fan.width(s) == pytest.approx(length_l(s, fan_solution, trace_spec, consts), rel=1e-4)


def test_fan_table_columns(fan):
    bounds = shock_bounds(SQRT2, -2 * SQRT2, 0.05, 1.0)
    table = fan.table(fan.left.grid, bounds)
    assert list(table.columns) == ["t", "nu_tilde_minus", "nu_tilde_plus", "s_minus", "s_plus"]
    assert len(table) == len(fan.left.grid)


# ============================================================================
# Pullback maps
# ============================================================================

def test_pullback_starts_at_origin(pullback_maps):
    for pmap in pullback_maps:
        assert pmap.x2[0] == 0.0
        assert pmap.h[0] == 0.0


def test_pullback_sides(pullback_maps):
    left, right = pullback_maps
    assert all(x <= 0.0 for x in left.x2)
    assert all(x >= 0.0 for x in right.x2)
    assert min(abs(x) for x in left.x2[1:]) == pytest.approx(1e-8)


def test_pullback_solves_characteristic_equation(pullback_maps, fan, trace_spec):
    """nu~(h) = x2 + h lambda^nu(h) at every sample."""
    for pmap in pullback_maps:
        curve = fan.curve(pmap.side)
        for x, h in list(zip(pmap.x2, pmap.h))[1::20]:
            residual = curve.position(h) - x - h * trace_speed(h, trace_spec, pmap.side)
            assert abs(residual) < 1e-10


def test_limit_slope_signs(trace_spec, consts):
    """h'(0) = 1 / (nu(0+) - lambda^nu(0+)): negative on the left."""
    left = limit_slope(Side.LEFT, trace_spec, consts)
    right = limit_slope(Side.RIGHT, trace_spec, consts)
    assert left == pytest.approx(-0.2531, abs=0.03)
    assert right > 0.0


def test_slope_estimate_agrees_in_sign(pullback_maps):
    for pmap in pullback_maps:
        assert math.copysign(1.0, pmap.slope_estimate) == math.copysign(1.0, pmap.slope_at_zero)


def test_pullback_rejects_center(fan, trace_spec):
    with pytest.raises(DomainError):
        pullback_h(Side.CENTER, fan, trace_spec)


def test_pullback_rejects_oversized_grid(fan, trace_spec):
    with pytest.raises(DomainError, match="pullback_min"):
        pullback_h(Side.RIGHT, fan, trace_spec, pullback_min=1.0)


# ============================================================================
# Hypothesis checks
# ============================================================================

def _synthetic(side, fn):
    x = np.geomspace(1e-10, 1e-1, 145)
    sign = -1.0 if side == Side.LEFT else 1.0
    return PullbackMap(
        side=side,
        x2=[0.0] + (sign * x).tolist(),
        h=[0.0] + fn(x).tolist(),
        slope_at_zero=sign,
    )


def test_linear_map_passes_every_check():
    report = hypothesis_check(_synthetic(Side.RIGHT, lambda x: x))
    assert report.passed, report.failures()
    assert report.quantities["envelope_slope"] == 0.0


def test_square_root_map_fails_envelope():
    """h = sqrt(x) has |h''| |x| ~ x^(-1/2), beyond every polylog envelope."""
    report = hypothesis_check(_synthetic(Side.LEFT, np.sqrt))
    assert report.failures() == ["envelope"]
    assert report.check("envelope").value > 0.3


def test_wrong_slope_sign_reported():
    pmap = _synthetic(Side.LEFT, lambda x: x).model_copy(update={"slope_at_zero": 0.25})
    assert "slope_sign" in hypothesis_check(pmap).failures()


def test_reconstructed_maps_satisfy_hypotheses(pullback_maps):
    for pmap in pullback_maps:
        report = hypothesis_check(pmap)
        assert report.passed, (pmap.side, report.failures())


# ============================================================================
# The datum
# ============================================================================

def test_stitch_points_inside_zeta1(datum):
    assert -0.3 < datum.left.stitch_point < 0.0
    assert 0.0 < datum.right.stitch_point < 0.3


def test_plateaus_exact(datum):
    assert datum.lambda0(-0.31) == SQRT2
    assert datum.lambda0(0.31) == -2 * SQRT2
    left = datum.state(-0.5)
    right = datum.state(0.5)
    assert (left.rho, left.m2) == pytest.approx((1.0, 2 * SQRT2), abs=1e-14)
    assert (right.rho, right.m2) == pytest.approx((4.0, 0.0), abs=1e-14)


def test_datum_composite_form(datum, pullback_maps, trace_spec):
    """Near the origin the datum is b +- a f0(h(x2))."""
    for pmap in pullback_maps:
        sign = trace_spec.direction(pmap.side)
        base = trace_spec.inner_base(pmap.side)
        for x, h in list(zip(pmap.x2, pmap.h))[1::25]:
            if h >= trace_spec.delta:
                continue
            expected = base + sign * 0.05 * f0_eval(h)
            assert datum.lambda0(x) == pytest.approx(expected, abs=1e-8)


def test_datum_monotone(datum):
    xs = np.linspace(-0.29, 0.29, 200)
    values = [datum.lambda0(float(x)) for x in xs]
    assert all(b <= a + 1e-15 for a, b in zip(values[:-1], values[1:]))


def test_smooth_datum_monotone(datum):
    table = datum.smooth_table(np.linspace(-2.5, 3.5, 121))
    assert list(table.columns) == ["x2", "lambda1", "rho", "m2"]
    assert np.all(np.diff(table["lambda1"].to_numpy()) <= 1e-12)
    assert table["lambda1"].iloc[0] == SQRT2
    assert table["lambda1"].iloc[-1] == -2 * SQRT2


def test_datum_table_columns(datum):
    table = datum.table([-0.5, -0.01, 0.01, 0.5])
    assert list(table.columns) == ["x2", "lambda1_0", "rho0", "m2_0"]
    assert table["rho0"].iloc[0] == pytest.approx(1.0, abs=1e-14)


def test_round_trip_reproduces_traces(datum, fan, trace_spec):
    """Forward characteristics from the datum land back on the prescribed traces."""
    deviation = round_trip(datum, fan, trace_spec, np.geomspace(1e-4, 0.02, 9))
    assert deviation < 1e-6


@pytest.mark.parametrize("side", [Side.LEFT, Side.RIGHT])
def test_derivatives_approach_focusing_fan(datum, side):
    gaps = derivative_decay(datum, side, orders=(1, 2))
    for order in (1, 2):
        values = gaps[order]
        assert values[0] > values[1] > values[2]


def test_datum_report_passes(datum, fan, trace_spec):
    report = datum_report(datum, fan, trace_spec, np.geomspace(1e-4, 0.02, 5), 0.3)
    assert report.passed, report.failures()
    assert report.quantities["b_minus"] == pytest.approx(SQRT2 - 0.05)
    assert report.quantities["a_plus"] == 0.05


def test_pullback_pieces_have_no_document(datum):
    with pytest.raises(GeometryError):
        datum.profile.to_document()


def test_swapped_maps_rejected(pullback_maps, trace_spec, fan):
    left, right = pullback_maps
    with pytest.raises(GeometryError, match="left, right"):
        build_initial_datum(right, left, trace_spec, fan)


def test_narrow_zeta1_rejected(pullback_maps, trace_spec, fan):
    left, right = pullback_maps
    with pytest.raises(GeometryError, match="stitch points"):
        build_initial_datum(left, right, trace_spec, fan, zeta1=0.1)
