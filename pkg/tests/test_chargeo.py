"""Characteristic geometry: null covectors, frames, surfaces, classification."""

from __future__ import annotations

import math

import numpy as np
import pytest

from acoustic_horizons.chargeo import (
    char_frames,
    characteristic_residual,
    classify_hole,
    curve_is_simple,
    curve_normals,
    ergosphere_null_covector,
    flow_alignment_condition,
    inner_boundary_condition,
    spatial_null_covectors,
    time_root_at_null,
)
from acoustic_horizons.errors import (
    MalformedCurve,
    MixedSign,
    NoRealCharacteristics,
    NotCharacteristic,
    NotInErgoregion,
    NotOnErgosphere,
    ZeroRoot,
)
from acoustic_horizons.metrics import (
    acoustic_metric,
    gordon_metric,
    radial_linear_flow,
    vortex_flow,
)
from conftest import circle


# ---------------------------------------------------------------------------
# Null covectors
# ---------------------------------------------------------------------------

def test_null_covectors_unit_vortex_axes(unit_vortex):
    pair = spatial_null_covectors(unit_vortex, [1.0, 0.0])
    got = sorted([tuple(np.round(np.abs(pair.xi_plus), 12)),
                  tuple(np.round(np.abs(pair.xi_minus), 12))])
    assert got == [(0.0, 1.0), (1.0, 0.0)]
    assert pair.discriminant == pytest.approx(1.0)


def test_null_covectors_satisfy_quadratic(unit_vortex):
    rng = np.random.default_rng(3)
    for _ in range(100):
        r = rng.uniform(0.4, 1.41)
        th = rng.uniform(0, 2 * math.pi)
        x = np.array([r * math.cos(th), r * math.sin(th)])
        pair = spatial_null_covectors(unit_vortex, x)
        sp = unit_vortex.eval(x)[1:, 1:]
        for xi in (pair.xi_plus, pair.xi_minus):
            assert abs(xi @ sp @ xi) < 1e-10
            assert np.linalg.norm(xi) == pytest.approx(1.0)


def test_null_covectors_collapse_on_locus(unit_vortex):
    y = np.array([math.sqrt(2), 0.0])
    pair = spatial_null_covectors(unit_vortex, y)
    np.testing.assert_allclose(pair.xi_plus, pair.xi_minus, atol=1e-8)


def test_null_covectors_complex_outside(minkowski):
    with pytest.raises(NoRealCharacteristics):
        spatial_null_covectors(minkowski, [0.3, 0.2])


# ---------------------------------------------------------------------------
# Degenerate-locus covector
# ---------------------------------------------------------------------------

def test_locus_covector_aligns_with_flow(unit_vortex):
    y = np.array([math.sqrt(2), 0.0])
    b = ergosphere_null_covector(unit_vortex, y)
    np.testing.assert_allclose(b, [1 / math.sqrt(2), 1 / math.sqrt(2)],
                               atol=1e-7)
    sp = unit_vortex.eval(y)[1:, 1:]
    assert np.linalg.norm(sp @ b) < 1e-8


def test_locus_covector_scale_invariant(unit_vortex):
    y = np.array([1.0, 1.0])  # also on r = sqrt(2)
    b1 = ergosphere_null_covector(unit_vortex, y)
    scaled = unit_vortex.replace(
        eval_fn=lambda x: 3.0 * unit_vortex.eval_fn(x), scalar_fn=None)
    b2 = ergosphere_null_covector(scaled, y)
    np.testing.assert_allclose(b1, b2, atol=1e-7)


def test_locus_covector_generic_speed_match():
    # any metric with spatial block -c^2 I + v v^T and |v| = c has b || v
    m = acoustic_metric(vortex_flow(2.0, 1.0, c=1.0))
    r0 = math.sqrt(5.0)
    y = r0 * np.array([math.cos(0.7), math.sin(0.7)])
    b = ergosphere_null_covector(m, y)
    v = vortex_flow(2.0, 1.0).w(y)
    cosang = abs(np.dot(b, v) / np.linalg.norm(v))
    assert cosang == pytest.approx(1.0, abs=1e-7)


def test_locus_covector_rejects_interior(unit_vortex):
    with pytest.raises(NotOnErgosphere):
        ergosphere_null_covector(unit_vortex, [1.0, 0.0])


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------

def test_frames_merge_inward_on_locus(unit_vortex):
    fp = char_frames(unit_vortex, [math.sqrt(2), 0.0])
    np.testing.assert_allclose(fp.f_plus, fp.f_minus, atol=1e-12)
    np.testing.assert_allclose(fp.f_plus, [-1 / math.sqrt(2), 1 / math.sqrt(2)],
                               atol=1e-7)
    assert fp.merged
    assert np.dot(fp.f_plus, [1.0, 0.0]) < 0  # pointed inside


def test_frames_distinct_inside():
    m = acoustic_metric(vortex_flow(1.0, 2.0))
    fp = char_frames(m, [1.5, 0.0])  # inside ergoregion r < sqrt(5)
    angle = math.acos(np.clip(np.dot(fp.f_plus, fp.f_minus), -1, 1))
    assert angle > 1e-3
    assert not fp.merged


def test_frames_orthogonal_to_their_covectors(unit_vortex):
    x = np.array([1.2, 0.4])
    pair = spatial_null_covectors(unit_vortex, x)
    fp = char_frames(unit_vortex, x)
    assert abs(np.dot(fp.f_plus, pair.xi_plus)) < 1e-10
    assert abs(np.dot(fp.f_minus, pair.xi_minus)) < 1e-10
    assert np.linalg.norm(fp.f_plus) == pytest.approx(1.0)
    assert np.linalg.norm(fp.f_minus) == pytest.approx(1.0)


def test_frames_collapse_property_near_locus(unit_vortex):
    # within the on-locus tolerance the pair is merged by construction
    for th in np.linspace(0, 2 * math.pi, 7):
        y = (math.sqrt(2) + 1e-10) * np.array([math.cos(th), math.sin(th)])
        fp = char_frames(unit_vortex, y)
        assert np.linalg.norm(fp.f_plus - fp.f_minus) < 1e-6


def test_frames_match_closed_form_vortex_fields(unit_vortex):
    # oracle: the two polar direction fields of the unit vortex
    A = B = 1.0
    for r in (0.7, 0.95, 1.2, 1.35):
        for th in (0.0, 1.1, 3.9):
            x = r * np.array([math.cos(th), math.sin(th)])
            rhat = x / r
            that = np.array([-rhat[1], rhat[0]])
            fp = char_frames(unit_vortex, x)
            root = math.sqrt(max(A * A + B * B - r * r, 0.0))
            v_plus = (A * A - r * r) * rhat + (A * B / r + root) * r * that
            v_plus /= np.linalg.norm(v_plus)
            dth_minus = (1 - B * B / (r * r)) / (A * B / r + root)
            v_minus = -rhat + dth_minus * r * that
            v_minus /= np.linalg.norm(v_minus)
            np.testing.assert_allclose(fp.f_plus, v_plus, atol=1e-9)
            np.testing.assert_allclose(fp.f_minus, v_minus, atol=1e-9)


# ---------------------------------------------------------------------------
# Characteristic surfaces and classification
# ---------------------------------------------------------------------------

def test_horizon_circle_is_characteristic(unit_vortex):
    assert characteristic_residual(circle(1.0, 256), unit_vortex) < 1e-8


@pytest.mark.parametrize("A", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("B", [0.5, 1.0, 2.0])
def test_horizon_residual_grid(A, B):
    m = acoustic_metric(vortex_flow(A, B))
    assert characteristic_residual(circle(A, 256), m) < 1e-8


def test_ergosphere_circle_not_characteristic(unit_vortex):
    # with rotation the locus normal is not the degenerate direction:
    # oracle evaluates nu.G.nu with nu = rhat directly
    y = np.array([math.sqrt(2), 0.0])
    sp = unit_vortex.eval(y)[1:, 1:]
    direct = abs(np.array([1.0, 0.0]) @ sp @ np.array([1.0, 0.0]))
    assert direct > 0.4
    res = characteristic_residual(circle(math.sqrt(2), 256), unit_vortex)
    assert res > 0.4


def test_outside_circle_far_from_characteristic(unit_vortex):
    assert characteristic_residual(circle(2.0, 128), unit_vortex) > 0.4


def test_malformed_curves(unit_vortex):
    with pytest.raises(MalformedCurve):
        characteristic_residual(circle(1.0, 6), unit_vortex)
    arc = circle(1.0, 128)[:40]  # open arc
    with pytest.raises(MalformedCurve):
        characteristic_residual(arc, unit_vortex)


def test_classify_white_and_black(unit_vortex, drain_vortex):
    white = classify_hole(circle(1.0, 256), unit_vortex)
    assert white.kind == "WhiteHole"
    assert white.margin == pytest.approx(1.0, abs=1e-9)
    black = classify_hole(circle(1.0, 256), drain_vortex)
    assert black.kind == "BlackHole"
    assert black.margin == pytest.approx(1.0, abs=1e-9)


def test_classify_pure_radial_outflow():
    m = acoustic_metric(vortex_flow(1.0, 1e-12))  # effectively radial
    assert classify_hole(circle(1.0, 256), m).kind == "WhiteHole"


def test_classify_scale_invariant_and_time_reversal(unit_vortex):
    scaled = unit_vortex.replace(
        eval_fn=lambda x: 2.5 * unit_vortex.eval_fn(x), scalar_fn=None)
    assert classify_hole(circle(1.0, 256), scaled).kind == "WhiteHole"
    reversed_flow = acoustic_metric(vortex_flow(-1.0, -1.0))
    assert classify_hole(circle(1.0, 256), reversed_flow).kind == "BlackHole"


def test_classify_rejects_noncharacteristic(unit_vortex):
    with pytest.raises(NotCharacteristic):
        classify_hole(circle(1.2, 256), unit_vortex)


def test_classify_mixed_sign():
    # an off-center characteristic-ish curve is rejected before the sign
    # check; build a synthetic metric whose time row flips sign instead
    import numpy as np
    from acoustic_horizons.metrics import SpacetimeMetric

    def eval_fn(x):
        x = np.asarray(x, dtype=float)
        g = np.zeros(x.shape[:-1] + (3, 3))
        g[..., 0, 0] = 1.0
        g[..., 1, 1] = 0.0   # rhat is null everywhere (degenerate block)
        g[..., 2, 2] = -1.0
        row1 = x[..., 0]     # g^{01} = x1: sign flips across the axis
        g[..., 0, 1] = row1
        g[..., 1, 0] = row1
        return g

    m = SpacetimeMetric(2, eval_fn)
    with pytest.raises(MixedSign):
        classify_hole(circle(1.0, 128), m)


# ---------------------------------------------------------------------------
# Time root
# ---------------------------------------------------------------------------

def test_time_root_value(unit_vortex):
    y = np.array([math.sqrt(2), 0.0])
    b = np.array([1 / math.sqrt(2), 1 / math.sqrt(2)])
    root = time_root_at_null(unit_vortex, y, b)
    assert root == pytest.approx(-2.0, abs=1e-9)
    # oracle: the full quadratic in xi0 vanishes at the returned root
    g = unit_vortex.eval(y)
    xi = np.array([root, b[0], b[1]])
    assert abs(xi @ g @ xi) < 1e-10
    # odd under covector flip
    assert time_root_at_null(unit_vortex, y, -b) == pytest.approx(2.0)


def test_time_root_never_zero_on_horizon(unit_vortex):
    pts = circle(1.0, 64)
    normals = curve_normals(pts)
    for y, nu in zip(pts, normals):
        assert abs(time_root_at_null(unit_vortex, y, nu)) > 1e-8


def test_time_root_zero_raises():
    # pure rotation: b is tangent to the locus and the time row kills it
    m = acoustic_metric(vortex_flow(1e-13, 1.0))
    y = np.array([1.0, 0.0])
    xi = np.array([0.0, 1.0])  # spatially null at |v| = 1, orthogonal row
    with pytest.raises((ZeroRoot, NotCharacteristic)):
        time_root_at_null(m, y, xi)


# ---------------------------------------------------------------------------
# Inner-boundary condition and flow alignment
# ---------------------------------------------------------------------------

def test_inner_condition_white_hole(unit_vortex):
    assert inner_boundary_condition(unit_vortex, circle(0.5, 64)) == "a"


def test_inner_condition_black_hole(drain_vortex):
    assert inner_boundary_condition(drain_vortex, circle(0.5, 64)) == "b"


def test_inner_condition_mixed(unit_vortex):
    # between horizon and ergosphere the two families cross opposite ways
    assert inner_boundary_condition(unit_vortex, circle(1.2, 64)) == "neither"


def test_inner_condition_outside_raises(unit_vortex):
    with pytest.raises(NotInErgoregion):
        inner_boundary_condition(unit_vortex, circle(1.8, 64))


def test_flow_alignment_threshold():
    flow = radial_linear_flow(r0=1.0, n_index=2.0)
    gordon_metric(flow)  # degenerate locus at r = 1; ergoregion outside
    cond = flow_alignment_condition(flow, circle(1.3, 64))
    assert cond["exceeds_plus_one"]
    inner = flow_alignment_condition(flow, circle(0.5, 64))
    assert not inner["exceeds_plus_one"] and not inner["below_minus_one"]


# ---------------------------------------------------------------------------
# Curve helpers
# ---------------------------------------------------------------------------

def test_curve_normals_exact_on_circles():
    pts = circle(1.7, 200)
    normals = curve_normals(pts)
    np.testing.assert_allclose(normals, pts / 1.7, atol=1e-13)


def test_curve_is_simple():
    assert curve_is_simple(circle(1.0, 64))
    th = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    fig8 = np.stack([np.sin(2 * th), np.sin(th)], axis=1)
    assert not curve_is_simple(fig8)
