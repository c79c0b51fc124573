"""
Tests for f0, the piece catalogue and the compression-wave datum.
"""

import math

import numpy as np
import pytest

from src.core.exceptions import DomainError, GeometryError
from src.core.models import F0Params, HSpec, ProfileMode, Side
from src.core.profiles import (
    BridgePiece,
    CharacteristicPiece,
    CompositePiece,
    ConstantPiece,
    LambdaProfile,
    LinearPiece,
    build_compression_datum,
    cone_slopes,
    f0_derivative,
    f0_eval,
    f0_inverse,
    f0_inverse_derivative,
    pure_f0_profile,
    quintic_bridge,
    riemann_profile,
)

SQRT2 = math.sqrt(2.0)


# ============================================================================
# f0
# ============================================================================

def test_f0_midpoint():
    """f0(exp(-e)) = 1 - (2/pi) arctan(1) = 1/2."""
    assert f0_eval(math.exp(-math.e)) == pytest.approx(0.5, abs=1e-15)


def test_f0_at_inverse_e():
    """log|log(1/e)| = 0, so f0(1/e) = 1."""
    assert f0_eval(math.exp(-1.0)) == pytest.approx(1.0, abs=1e-15)


def test_f0_small_argument():
    assert f0_eval(0.02) == pytest.approx(0.4030, abs=1e-3)
    assert f0_eval(1e-300) < 0.15


@pytest.mark.parametrize("x", [0.0, 1.0, -0.5, 2.0])
def test_f0_domain(x):
    with pytest.raises(DomainError):
        f0_eval(x)


def test_f0_increasing():
    xs = np.geomspace(1e-200, 0.99, 400)
    values = [f0_eval(x) for x in xs]
    assert all(b > a for a, b in zip(values[:-1], values[1:]))


@pytest.mark.parametrize("x", [1e-4, 0.01, 0.2, 0.6])
def test_f0_first_derivative_matches_difference(x):
    h = 1e-6 * x
    fd = (f0_eval(x + h) - f0_eval(x - h)) / (2 * h)
    assert f0_derivative(x, 1) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("x", [1e-3, 0.05, 0.3])
def test_f0_second_derivative_matches_difference(x):
    h = 1e-5 * x
    fd = (f0_derivative(x + h, 1) - f0_derivative(x - h, 1)) / (2 * h)
    assert f0_derivative(x, 2) == pytest.approx(fd, rel=1e-5)


def test_f0_third_derivative_by_differences():
    x = 0.1
    h = 1e-5 * x
    fd = (f0_derivative(x + h, 2) - f0_derivative(x - h, 2)) / (2 * h)
    assert f0_derivative(x, 3) == pytest.approx(fd, rel=1e-4)


def test_f0_derivative_order_checked():
    with pytest.raises(DomainError):
        f0_derivative(0.1, 0)


# ============================================================================
# Inverse profile
# ============================================================================

@pytest.mark.parametrize("y", [1e-12, 1e-3, 0.1, 0.3])
def test_f0_inverse_round_trip(y):
    assert f0_inverse(f0_eval(y)) == pytest.approx(y, rel=1e-10)


def test_f0_inverse_at_zero():
    assert f0_inverse(0.0) == 0.0
    assert f0_inverse_derivative(0.0, 1) == 0.0


def test_f0_inverse_derivative_is_reciprocal():
    """dy/dv = 1 / f0'(y)."""
    y = 0.05
    assert f0_inverse_derivative(f0_eval(y), 1) == pytest.approx(1.0 / f0_derivative(y, 1), rel=1e-9)


def test_f0_inverse_second_derivative_matches_difference():
    v = 0.7
    h = 1e-6
    fd = (f0_inverse_derivative(v + h, 1) - f0_inverse_derivative(v - h, 1)) / (2 * h)
    assert f0_inverse_derivative(v, 2) == pytest.approx(fd, rel=1e-6)


# ============================================================================
# Pieces
# ============================================================================

def test_constant_piece_inversion():
    piece = ConstantPiece(side=Side.LEFT, anchor=1.0, value=2.0, hi=-0.3)
    assert piece.invert(0.0, -3.0) == pytest.approx(-1.0)
    assert piece.position(1.0, -0.5) == -0.5


def test_linear_piece_focus():
    """All characteristics of the focusing fan meet at x = 0, t = anchor."""
    piece = LinearPiece(anchor=1.0, lam_lo=-2.0, lam_hi=1.0)
    assert np.allclose(piece.position(1.0, np.array([-2.0, 0.0, 1.0])), 0.0)
    assert piece.invert(0.5, 0.25) == pytest.approx(-0.5)


def test_composite_piece_value_at_anchor():
    piece = CompositePiece(
        side=Side.RIGHT, anchor=1.0, a=0.05, b=-2.0, k=1.0, mirror=1, sign=-1, radius=0.075,
        v_max=f0_eval(0.075),
    )
    assert piece.value_at_anchor(0.01) == pytest.approx(-2.0 - 0.05 * f0_eval(0.01))
    assert piece.value_at_anchor(0.0) == -2.0
    assert piece.anchor_interval() == (0.0, 0.075)


def test_bridge_matches_end_data():
    piece = quintic_bridge(0.0, 1.0, (1.0, 0.0, 0.0), (0.0, 0.0, 0.0), Side.LEFT)
    assert piece.speed(0.0) == pytest.approx(1.0)
    assert piece.speed(1.0) == pytest.approx(0.0, abs=1e-15)
    assert piece.speed_dp(0.5) < 0.0


def test_non_monotone_bridge_rejected():
    """A steep start slope in the wrong direction forces an interior turn."""
    with pytest.raises(GeometryError, match="non-monotone"):
        quintic_bridge(0.0, 1.0, (1.0, 5.0, 0.0), (0.0, 0.0, 0.0), Side.LEFT)


def test_cone_slopes():
    s_minus, s_plus = cone_slopes(SQRT2, -2 * SQRT2, 0.05, 1.0)
    assert s_minus == pytest.approx(-0.73211, abs=1e-5)
    assert s_plus == pytest.approx(-0.68211, abs=1e-5)


def test_piece_interface_is_abstract():
    with pytest.raises(TypeError):
        CharacteristicPiece(kind="constant", side=Side.LEFT)


# ============================================================================
# Compression datum
# ============================================================================

def test_compression_datum_plateaus(compression_datum):
    """Outside |x| <= zeta1 the collapse profile is exactly the far field."""
    assert compression_datum.evaluate(-0.5) == SQRT2
    assert compression_datum.evaluate(0.5) == -2 * SQRT2


def test_compression_datum_composite_form(compression_datum):
    """On |x| < zeta_bar the collapse profile is b -+ a f0(|x|)."""
    b_minus = SQRT2 - 0.05
    b_plus = -2 * SQRT2 + 0.05
    for x in (1e-6, 1e-3, 0.05):
        assert compression_datum.evaluate(-x) == pytest.approx(b_minus + 0.05 * f0_eval(x), abs=1e-12)
        assert compression_datum.evaluate(x) == pytest.approx(b_plus - 0.05 * f0_eval(x), abs=1e-12)


def test_compression_datum_jump_at_focus(compression_datum):
    """The collapse profile jumps from b_- to b_+ at the origin."""
    assert compression_datum.evaluate(0.0) == pytest.approx(SQRT2 - 0.05)


def test_compression_datum_monotone_at_t0(compression_datum):
    """The t = 0 datum decreases and its breakpoints are ordered."""
    initial = compression_datum.model_copy(update={"mode": ProfileMode.INITIAL})
    xs = np.linspace(-2.0, 3.5, 301)
    values = initial.evaluate_many(xs)
    assert np.all(np.diff(values) <= 1e-15)
    points = compression_datum.breakpoints(0.0)
    assert all(b > a for a, b in zip(points[:-1], points[1:]))


def test_compression_datum_continuous_at_collapse(compression_datum):
    jumps = compression_datum.joint_jumps(1.0)
    for gap, value, _ in jumps:
        assert abs(gap) < 1e-12
    # Only the joints touching the focusing fan may jump in value
    assert max(abs(v) for _, v, _ in (jumps[0], jumps[1], jumps[4], jumps[5])) < 1e-12


def test_compression_datum_rejects_wide_inner_width():
    f0p = F0Params.from_wave(SQRT2, -2 * SQRT2, 1.0, 0.25, 0.05, 0.05, 0.075)
    with pytest.raises(GeometryError):
        build_compression_datum(SQRT2, -2 * SQRT2, 1.0, 0.2, 0.25, f0p)


def test_compression_datum_rejects_large_amplitude():
    """a f0(zeta_bar) must stay below zeta2/T."""
    f0p = F0Params.from_wave(SQRT2, -2 * SQRT2, 1.0, 0.05, 1.0, 1.0, 0.075)
    with pytest.raises(GeometryError, match="overlapping"):
        build_compression_datum(SQRT2, -2 * SQRT2, 1.0, 0.3, 0.05, f0p, HSpec())


def test_compression_datum_rejects_inconsistent_offsets():
    f0p = F0Params(a_plus=0.05, a_minus=0.05, b_plus=-2.0, b_minus=1.0, zeta_bar=0.075)
    with pytest.raises(GeometryError, match="offsets"):
        build_compression_datum(SQRT2, -2 * SQRT2, 1.0, 0.3, 0.05, f0p)


# ============================================================================
# Degenerate profiles and serialization
# ============================================================================

def test_riemann_profile():
    profile = riemann_profile(SQRT2, -2 * SQRT2)
    assert profile.evaluate(-1.0) == SQRT2
    assert profile.evaluate(1.0) == -2 * SQRT2


def test_pure_f0_profile():
    profile = pure_f0_profile()
    assert profile.evaluate(-0.1) == 0.0
    assert profile.evaluate(0.01) == pytest.approx(f0_eval(0.01), abs=1e-12)
    assert profile.evaluate(0.9) == 1.0


def test_document_round_trip(compression_datum):
    """Serialized profiles evaluate identically after loading."""
    restored = LambdaProfile.from_document(compression_datum.to_document())
    assert isinstance(restored.pieces[1], BridgePiece)
    for x in (-0.5, -0.2, -0.01, 0.0, 0.02, 0.15, 0.7):
        assert restored.evaluate(x) == compression_datum.evaluate(x)
