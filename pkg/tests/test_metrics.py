"""Metric families: worked examples, invariants, derivative accuracy."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acoustic_horizons.errors import (
    EvaluationOutsideDomain,
    InvalidProfile,
    NotAxisymmetric,
)
from acoustic_horizons.metrics import (
    Domain,
    SpacetimeMetric,
    acoustic_metric,
    axisym_reduce,
    gordon_metric,
    lower_metric,
    minkowski_metric,
    polar_components,
    radial_profile_flow,
    slow_medium_metric,
    spatial_det,
    uniform_flow,
    validate_hyperbolicity,
    vortex_flow,
)
from conftest import profile_a, profile_b, PROFILE_R0, PROFILE_R1


# ---------------------------------------------------------------------------
# Optical (moving dielectric) family
# ---------------------------------------------------------------------------

def test_gordon_trivial_index_one_is_minkowski():
    m = gordon_metric(uniform_flow((0.3, -0.7), n_index=1.0))
    g = m.eval([0.2, 0.4])
    np.testing.assert_allclose(g, np.diag([1.0, -1.0, -1.0]), atol=1e-14)


def test_gordon_rest_frame():
    m = gordon_metric(uniform_flow((0.0, 0.0), n_index=2.0))
    g = m.eval([1.0, 2.0])
    assert g[0, 0] == pytest.approx(4.0)
    np.testing.assert_allclose(g[0, 1:], 0.0, atol=1e-15)
    np.testing.assert_allclose(np.diag(g)[1:], -1.0)


def test_gordon_half_lightspeed_point():
    # w = (c/2, 0), n = 2, c = 1: four-velocity gives g00=5, g01=2, g11=0
    m = gordon_metric(uniform_flow((0.5, 0.0), n_index=2.0, c=1.0))
    g = m.eval([0.0, 0.0])
    assert g[0, 0] == pytest.approx(5.0)
    assert g[0, 1] == pytest.approx(2.0)
    assert g[1, 1] == pytest.approx(0.0, abs=1e-14)
    assert g[2, 2] == pytest.approx(-1.0)
    # on the degenerate locus: |w|^2 = c^2/n^2
    assert spatial_det(m, [0.0, 0.0]) == pytest.approx(0.0, abs=1e-14)


def test_gordon_superluminal_flow_rejected():
    m = gordon_metric(uniform_flow((1.5, 0.0), n_index=2.0, c=1.0))
    with pytest.raises(EvaluationOutsideDomain):
        m.eval([0.0, 0.0])


def test_gordon_determinant_sign_tracks_flow_speed():
    # sign(Delta) = sign(c^2/n^2 - |w|^2) across the degenerate locus
    n = 2.0
    flow_scale = [0.2, 0.49, 0.51, 0.7]  # |w| relative to c=1; c/n = 0.5
    for w1 in flow_scale:
        m = gordon_metric(uniform_flow((w1, 0.0), n_index=n))
        d = spatial_det(m, [0.3, 0.1])
        assert math.copysign(1, d) == math.copysign(1, (1.0 / n**2) - w1**2)


# ---------------------------------------------------------------------------
# Slow-medium family
# ---------------------------------------------------------------------------

def test_slow_medium_values():
    m = slow_medium_metric(uniform_flow((1.0, 0.0), n_index=2.0, c=1.0))
    g = m.eval([0.0, 0.0])
    assert g[0, 0] == pytest.approx(4.0)
    assert g[0, 1] == pytest.approx(3.0)  # (n^2 - 1) w_1 / c
    assert g[0, 2] == pytest.approx(0.0)
    assert g[1, 1] == pytest.approx(-1.0)
    assert g[2, 2] == pytest.approx(-1.0)


def test_slow_medium_always_unit_spatial_determinant():
    m = slow_medium_metric(uniform_flow((0.9, -0.4), n_index=3.0))
    pts = np.random.default_rng(0).uniform(-2, 2, size=(50, 2))
    np.testing.assert_allclose(spatial_det(m, pts), 1.0, atol=1e-15)


# ---------------------------------------------------------------------------
# Acoustic family and vortex flow
# ---------------------------------------------------------------------------

def test_acoustic_rest_fluid():
    flow = uniform_flow((0.0, 0.0), n_index=1.0)
    g = acoustic_metric(flow).eval([0.3, -0.2])
    np.testing.assert_allclose(g, np.diag([1.0, -1.0, -1.0]), atol=1e-15)


def test_acoustic_vortex_point_values(unit_vortex):
    g = unit_vortex.eval([1.0, 0.0])  # v = (1, 1) here
    assert g[1, 1] == pytest.approx(0.0, abs=1e-15)
    assert g[1, 2] == pytest.approx(1.0)
    assert g[2, 2] == pytest.approx(0.0, abs=1e-15)
    assert g[0, 1] == pytest.approx(1.0)
    assert g[0, 2] == pytest.approx(1.0)
    assert spatial_det(unit_vortex, [1.0, 0.0]) == pytest.approx(-1.0)


def test_acoustic_determinant_identity(unit_vortex):
    # det(-I + v v^T) = 1 - |v|^2 for rho = c = 1
    rng = np.random.default_rng(1)
    r = rng.uniform(0.3, 3.0, size=200)
    th = rng.uniform(0, 2 * math.pi, size=200)
    pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    v2 = 2.0 / r**2  # |v|^2 = (A^2 + B^2)/r^2
    np.testing.assert_allclose(spatial_det(unit_vortex, pts), 1.0 - v2,
                               atol=1e-12)


def test_acoustic_unit_speed_on_degenerate_locus():
    m = acoustic_metric(vortex_flow(1.0, 1.0))
    assert abs(spatial_det(m, [math.sqrt(2), 0.0])) < 1e-14
    assert spatial_det(m, [2.0, 0.0]) == pytest.approx(0.5)


@pytest.mark.parametrize("point,expected", [
    ((2.0, 0.0), (0.5, 0.0)),     # A=1, B=0: pure radial
    ((1.0, 0.0), (1.0, 1.0)),     # A=1, B=1 at (1, 0)
])
def test_vortex_flow_values(point, expected):
    A, B = (1.0, 0.0) if expected == (0.5, 0.0) else (1.0, 1.0)
    flow = vortex_flow(A, B)
    np.testing.assert_allclose(flow.w(np.array(point)), expected, atol=1e-15)


def test_vortex_flow_azimuthal_component():
    flow = vortex_flow(0.0, 1.0)
    np.testing.assert_allclose(flow.w(np.array([0.0, 2.0])), (-0.5, 0.0),
                               atol=1e-15)


def test_vortex_flow_singular_origin():
    flow = vortex_flow(1.0, 1.0)
    with pytest.raises(EvaluationOutsideDomain):
        flow.w(np.array([0.0, 0.0]))
    with pytest.raises(InvalidProfile):
        vortex_flow(0.0, 0.0)


# ---------------------------------------------------------------------------
# Radial profiles
# ---------------------------------------------------------------------------

def test_profile_matches_vortex_shape():
    # A(r) = A0/r, B(r) = B0/r reproduces the constant-circulation vortex
    A0, B0 = 0.8, 1.2
    r0 = math.sqrt(A0**2 + B0**2)  # speed hits 1 exactly there
    flow = radial_profile_flow(lambda r: A0 / r, lambda r: B0 / r,
                               r1=0.5, r0=r0)
    ref = vortex_flow(A0, B0)
    pts = np.array([[0.6, 0.1], [1.0, -0.3], [0.2, 0.9]])
    np.testing.assert_allclose(flow.w(pts), ref.w(pts), atol=1e-14)


def test_profile_validation_errors():
    with pytest.raises(InvalidProfile, match="B\\(r\\)"):
        radial_profile_flow(lambda r: 2.0 / r, lambda r: r - 10.0, 0.5, 2.0)
    with pytest.raises(InvalidProfile, match="must equal 1"):
        radial_profile_flow(lambda r: 1.0 / r, lambda r: 1.0 / r, 0.5, 2.0)
    with pytest.raises(InvalidProfile, match="exceed 1"):
        # supersonic annulus but subsonic radial part at the inner edge
        radial_profile_flow(
            lambda r: 0.5 * np.ones_like(np.asarray(r)),
            lambda r: np.sqrt(0.75 + 2.0 * (3.0 - r)),
            1.0, 3.0)


def test_shipped_profile_passes_validation(profile_metric):
    assert abs(spatial_det(profile_metric, [PROFILE_R0, 0.0])) < 1e-12
    assert spatial_det(profile_metric, [1.0, 0.0]) < 0


def test_profile_zero_radii_oracle():
    # bisection on A(r) -+ 1 recovers the prescribed sonic radii exactly
    from scipy.optimize import brentq
    beta1 = brentq(lambda r: profile_a(r) - 1.0, 0.6, 1.0, xtol=1e-14)
    alpha1 = brentq(lambda r: profile_a(r) + 1.0, 1.0, 1.3, xtol=1e-14)
    alpha2 = brentq(lambda r: profile_a(r) + 1.0, 1.3, 1.7, xtol=1e-14)
    assert beta1 == pytest.approx(0.8, abs=1e-12)
    assert alpha1 == pytest.approx(1.15, abs=1e-12)
    assert alpha2 == pytest.approx(1.5, abs=1e-12)
    assert abs(profile_a(PROFILE_R1)) > 1.0
    assert np.all(profile_b(np.linspace(PROFILE_R1, PROFILE_R0, 500)) > 0)


# ---------------------------------------------------------------------------
# Pointwise diagnostics
# ---------------------------------------------------------------------------

def test_lower_metric_minkowski(minkowski):
    np.testing.assert_allclose(lower_metric(minkowski, [0.1, 0.2]),
                               np.diag([1.0, -1.0, -1.0]))


def test_lower_metric_diagonal():
    m = SpacetimeMetric(2, lambda x: np.broadcast_to(
        np.diag([4.0, -1.0, -1.0]), np.shape(x)[:-1] + (3, 3)).copy())
    np.testing.assert_allclose(lower_metric(m, [0.0, 0.0]),
                               np.diag([0.25, -1.0, -1.0]))


def test_lower_metric_residual(unit_vortex):
    x = np.array([1.0, 0.0])
    inv = lower_metric(unit_vortex, x)
    resid = np.max(np.abs(inv @ unit_vortex.eval(x) - np.eye(3)))
    assert resid < 1e-12


def test_hyperbolicity_minkowski(minkowski):
    rep = validate_hyperbolicity(minkowski, [0.4, -0.3])
    assert rep.g00_positive and rep.spatial_negative_definite
    assert rep.time_axis_timelike and rep.flags_consistent


def test_hyperbolicity_inside_ergoregion(unit_vortex):
    rep = validate_hyperbolicity(unit_vortex, [1.0, 0.0])
    assert rep.g00_positive
    assert not rep.spatial_negative_definite
    assert rep.flags_consistent  # (negative definiteness) <=> (g_00 > 0)


def test_hyperbolicity_gordon_slow_flow():
    # |w| = c/(2n) keeps the flow strictly below the degeneracy threshold
    n = 3.0
    m = gordon_metric(uniform_flow((1.0 / (2 * n), 0.0), n_index=n))
    rep = validate_hyperbolicity(m, [0.5, 0.5])
    assert rep.spatial_negative_definite and rep.time_axis_timelike
    # oracle: characteristic polynomial roots of the 2x2 spatial block
    sp = m.eval([0.5, 0.5])[1:, 1:]
    tr, det = sp[0, 0] + sp[1, 1], sp[0, 0] * sp[1, 1] - sp[0, 1] ** 2
    lam = 0.5 * (tr + math.sqrt(tr**2 - 4 * det))
    assert lam < 0


@pytest.mark.parametrize("builder", [
    lambda: minkowski_metric(),
    lambda: acoustic_metric(vortex_flow(1.0, 1.0)),
    lambda: acoustic_metric(vortex_flow(-1.0, 1.0)),
    lambda: gordon_metric(uniform_flow((0.3, 0.1), n_index=1.8)),
    lambda: slow_medium_metric(uniform_flow((0.4, -0.2), n_index=1.5)),
])
def test_family_invariants_random_points(builder):
    # symmetry, Lorentz signature, g00 > 0 and positive volume form
    metric = builder()
    rng = np.random.default_rng(42)
    r = rng.uniform(0.3, 2.5, size=10_000)
    th = rng.uniform(0.0, 2 * math.pi, size=10_000)
    pts = np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    g = metric.eval(pts)
    np.testing.assert_allclose(g, np.swapaxes(g, -1, -2), atol=1e-13)
    assert np.all(g[:, 0, 0] > 0)
    eig = np.linalg.eigvalsh(g)
    assert np.all(np.sum(eig > 0, axis=1) == 1)
    assert np.all(np.linalg.det(g) > 0)  # (-1)^n g(x) > 0 for n = 2


# ---------------------------------------------------------------------------
# Derivatives
# ---------------------------------------------------------------------------

def test_fd_derivative_second_order_convergence(unit_vortex):
    # halving the step cuts the error against the analytic derivative ~4x
    pts = np.array([[1.1, 0.4], [0.7, -0.9], [1.8, 1.2]])
    errs = []
    for h in (1e-3, 5e-4):
        worst = 0.0
        for x in pts:
            for p in (1, 2):
                fd = unit_vortex.deriv_fd(x, p, h=h)
                exact = unit_vortex.deriv_fn(x, p)
                worst = max(worst, np.max(np.abs(fd - exact)))
        errs.append(worst)
    factor = errs[0] / errs[1]
    assert 3.5 < factor < 4.5


def test_analytic_derivatives_all_families():
    flows = [
        (gordon_metric, uniform_flow((0.2, 0.1), n_index=1.7)),
        (slow_medium_metric, uniform_flow((0.5, -0.3), n_index=2.0)),
        (acoustic_metric, vortex_flow(0.7, -1.3)),
    ]
    x = np.array([0.9, 0.6])
    for family, flow in flows:
        m = family(flow)
        for p in (1, 2):
            np.testing.assert_allclose(
                m.deriv(x, p), m.deriv_fd(x, p, h=1e-5),
                atol=1e-8, rtol=1e-6)


# ---------------------------------------------------------------------------
# Coordinate transforms
# ---------------------------------------------------------------------------

def test_polar_components_weight(unit_vortex):
    pc = polar_components(unit_vortex, np.array([1.4]), np.array([0.3]))
    assert pc["weight"][0] == pytest.approx(1.4)  # unit determinant family


def test_axisym_reduce_flat():
    def eval3(x):
        e = -np.eye(4)
        e[0, 0] = 1.0
        return np.broadcast_to(e, np.shape(x)[:-1] + (4, 4)).copy()

    m3 = SpacetimeMetric(3, eval3)
    form = axisym_reduce(m3)
    a = form.form(2.0, 1.1)
    assert a[0, 0] == pytest.approx(-1.0)
    assert a[0, 1] == pytest.approx(0.0, abs=1e-14)
    assert a[1, 1] == pytest.approx(-1.0 / 4.0)
    assert a[1, 0] == a[0, 1]


def test_axisym_reduce_radial_flow_no_cross_term():
    # 3-D optical metric of w = k x: azimuth-independent and a12 = 0
    k = 0.2

    def eval3(x):
        x = np.asarray(x, dtype=float)
        w = k * x
        beta2 = np.sum(w * w, axis=-1)
        gamma = 1.0 / np.sqrt(1.0 - beta2)
        v = np.concatenate([gamma[..., None], gamma[..., None] * w], axis=-1)
        e = -np.eye(4)
        e[0, 0] = 1.0
        g = np.broadcast_to(e, x.shape[:-1] + (4, 4)).copy()
        g += 3.0 * v[..., :, None] * v[..., None, :]
        return g

    m3 = SpacetimeMetric(3, eval3)
    form = axisym_reduce(m3)
    for rr, tt in [(1.0, 0.8), (1.6, 1.9), (0.7, 2.5)]:
        a = form.form(rr, tt)
        assert abs(a[0, 1]) < 1e-12
        assert a[0, 1] == a[1, 0]


def test_axisym_reduce_rejects_azimuthal_dependence():
    def eval3(x):
        x = np.asarray(x, dtype=float)
        e = -np.eye(4)
        e[0, 0] = 1.0
        g = np.broadcast_to(e, x.shape[:-1] + (4, 4)).copy()
        g[..., 1, 1] += 0.1 * x[..., 0]  # depends on x1, breaks symmetry
        return g

    with pytest.raises(NotAxisymmetric):
        axisym_reduce(SpacetimeMetric(3, eval3))


# ---------------------------------------------------------------------------
# Property-based checks
# ---------------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(r=st.floats(0.2, 4.0), th=st.floats(0.0, 2 * math.pi),
       a=st.floats(-2.0, 2.0), b=st.floats(-2.0, 2.0))
def test_vortex_polar_cartesian_identity(r, th, a, b):
    if abs(a) + abs(b) < 1e-3:
        return
    flow = vortex_flow(a, b)
    x = np.array([r * math.cos(th), r * math.sin(th)])
    w = flow.w(x)
    rhat = x / r
    that = np.array([-rhat[1], rhat[0]])
    assert np.dot(w, rhat) == pytest.approx(a / r, abs=1e-12)
    assert np.dot(w, that) == pytest.approx(b / r, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(r=st.floats(0.3, 3.0), th=st.floats(0.0, 2 * math.pi))
def test_lower_metric_inverse_property(r, th):
    m = acoustic_metric(vortex_flow(1.0, 2.0))
    x = np.array([r * math.cos(th), r * math.sin(th)])
    prod = lower_metric(m, x) @ m.eval(x)
    assert np.max(np.abs(prod - np.eye(3))) < 1e-10


def test_domain_rejects_outside_evaluation():
    flow = vortex_flow(1.0, 1.0, r_max=2.0)
    m = acoustic_metric(flow)
    with pytest.raises(EvaluationOutsideDomain):
        m.eval([3.0, 0.0])
    assert Domain(0.5, 2.0).contains(np.array([1.0, 0.0]))
