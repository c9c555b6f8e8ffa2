"""Null rays and planar characteristic orbits."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from acoustic_horizons.chargeo import spatial_null_covectors
from acoustic_horizons.errors import NotCharacteristic, NotInErgoregion
from acoustic_horizons.metrics import acoustic_metric, spatial_det, vortex_flow
from acoustic_horizons.rays import (
    PhasePoint,
    RayOptions,
    hamiltonian,
    integrate_planar_orbit,
    integrate_ray,
    lift_time_direction,
    null_phase_point,
    project_null,
    time_roots,
)


# ---------------------------------------------------------------------------
# Hamiltonian
# ---------------------------------------------------------------------------

def test_hamiltonian_flat_values(minkowski):
    p_null = PhasePoint(0.0, np.zeros(2), 1.0, np.array([1.0, 0.0]))
    assert hamiltonian(minkowski, p_null) == pytest.approx(0.0)
    p_timelike = PhasePoint(0.0, np.zeros(2), 2.0, np.array([1.0, 0.0]))
    assert hamiltonian(minkowski, p_timelike) == pytest.approx(3.0)


def test_hamiltonian_vortex_lifted_root(unit_vortex):
    y = np.array([math.sqrt(2), 0.0])
    xi = np.array([1 / math.sqrt(2), 1 / math.sqrt(2)])
    p = PhasePoint(0.0, y, -2.0, xi)  # the nonzero time root at this point
    assert abs(hamiltonian(unit_vortex, p)) < 1e-12


def test_time_roots_bracket_zero_on_null_covectors(unit_vortex):
    x = np.array([1.2, 0.0])
    pair = spatial_null_covectors(unit_vortex, x)
    roots = time_roots(unit_vortex, x, pair.xi_plus)
    assert min(abs(roots[0]), abs(roots[1])) < 1e-12  # one root is zero


# ---------------------------------------------------------------------------
# Rays
# ---------------------------------------------------------------------------

def test_flat_ray_is_straight(minkowski):
    p0 = PhasePoint(0.0, np.zeros(2), 1.0, np.array([-1.0, 0.0]))
    ray = integrate_ray(minkowski, p0, 1.0)
    np.testing.assert_allclose(ray.x0, 2.0 * ray.s, atol=1e-12)
    np.testing.assert_allclose(ray.x[:, 0], 2.0 * ray.s, atol=1e-12)
    np.testing.assert_allclose(ray.x[:, 1], 0.0, atol=1e-14)
    assert np.max(np.abs(ray.h_residuals)) == 0.0
    assert ray.termination == "MaxSteps"


def test_ray_time_covector_frozen(unit_vortex):
    p0 = null_phase_point(unit_vortex, np.array([1.8, 0.3]),
                          np.array([0.3, -0.8]), planar=False)
    ray = integrate_ray(unit_vortex, p0, 4.0,
                        RayOptions(r_bounds=(0.05, 6.0)))
    assert np.max(np.abs(ray.xi0 - ray.xi0[0])) < 1e-12
    assert np.max(np.abs(ray.h_residuals)) < 1e-8


def test_ray_rejects_non_null_start(unit_vortex):
    p_bad = PhasePoint(0.0, np.array([1.8, 0.3]), 1.0, np.array([0.1, 0.0]))
    with pytest.raises(NotCharacteristic):
        integrate_ray(unit_vortex, p_bad, 1.0)


def test_trapped_ray_wraps_horizon(unit_vortex):
    # the forward lift of the inward family stalls on the cycle while the
    # time coordinate keeps growing and the covector blows up
    x0 = np.array([1.2, 0.0])
    pair = spatial_null_covectors(unit_vortex, x0)
    p0 = null_phase_point(unit_vortex, x0, pair.xi_plus, planar=True)
    ray = integrate_ray(unit_vortex, p0, 5.0,
                        RayOptions(r_bounds=(0.05, 5.0), xi_budget=1e4))
    assert ray.termination == "StagnationDetected"
    r_end = np.linalg.norm(ray.x[-1])
    assert r_end == pytest.approx(1.0, abs=1e-3)
    assert ray.x0[-1] > 5.0  # coordinate time ran on past the parameter
    xi2 = ray.xi0**2 + np.sum(ray.xi**2, axis=1)
    assert np.max(np.abs(ray.h_residuals) / np.maximum(1.0, xi2)) < 1e-8


def test_ray_projection_controls_drift(unit_vortex):
    p0 = null_phase_point(unit_vortex, np.array([1.8, 0.3]),
                          np.array([0.3, -0.8]), planar=False)
    loose = RayOptions(r_bounds=(0.05, 6.0), rtol=1e-6, atol=1e-6)
    ray_plain = integrate_ray(unit_vortex, p0, 4.0, loose)
    with_proj = RayOptions(r_bounds=(0.05, 6.0), rtol=1e-6, atol=1e-6,
                           project_ds=0.25)
    ray_proj = integrate_ray(unit_vortex, p0, 4.0, with_proj)
    assert ray_proj.h_residuals[-1] <= ray_plain.h_residuals[-1] * 1.5


def test_project_null_restores_constraint(unit_vortex):
    x = np.array([1.5, 0.2])
    xi0, xi = project_null(unit_vortex, x, 0.7, np.array([0.2, -0.9]))
    p = PhasePoint(0.0, x, xi0, xi)
    assert abs(hamiltonian(unit_vortex, p)) < 1e-10


# ---------------------------------------------------------------------------
# Planar orbits
# ---------------------------------------------------------------------------

def test_orbit_monotone_approach_from_outside(unit_vortex):
    orb = integrate_planar_orbit(unit_vortex, np.array([1.3, 0.0]), "+", 40.0)
    r = np.linalg.norm(orb.x, axis=1)
    assert np.all(np.diff(r) <= 1e-9)
    assert r[-1] == pytest.approx(1.0, abs=1e-6)
    assert orb.termination == "ConvergedToCycle"


def test_orbit_monotone_approach_from_inside(unit_vortex):
    orb = integrate_planar_orbit(unit_vortex, np.array([0.7, 0.0]), "+", 40.0)
    r = np.linalg.norm(orb.x, axis=1)
    assert np.all(np.diff(r) >= -1e-9)
    assert r[-1] == pytest.approx(1.0, abs=1e-6)


def test_orbit_on_cycle_stays_and_winds(unit_vortex):
    orb = integrate_planar_orbit(unit_vortex, np.array([1.0, 0.0]), "+", 10.0,
                                 RayOptions(detect_cycle=False))
    r = np.linalg.norm(orb.x, axis=1)
    assert np.max(np.abs(r - 1.0)) < 1e-8
    th = np.unwrap(np.arctan2(orb.x[:, 1], orb.x[:, 0]))
    assert np.all(np.diff(th) > 0)


def test_orbit_exit_crossing_is_resolved(unit_vortex):
    # reversed inward family runs outward and exits through the locus
    orb = integrate_planar_orbit(unit_vortex, np.array([1.2, 0.0]), "+", 20.0,
                                 RayOptions(detect_cycle=False),
                                 orientation=-1.0)
    assert orb.termination == "LeftErgoregion"
    assert abs(spatial_det(unit_vortex, orb.x[-1])) < 1e-10


def test_orbit_rejects_outside_start(unit_vortex):
    with pytest.raises(NotInErgoregion):
        integrate_planar_orbit(unit_vortex, np.array([2.0, 0.0]), "+", 5.0)


def test_orbit_from_locus_runs_inward(unit_vortex):
    y = np.array([math.sqrt(2), 0.0])
    orb = integrate_planar_orbit(unit_vortex, y, "-", 1.0,
                                 RayOptions(detect_cycle=False,
                                            r_bounds=(0.4, 5.0)))
    r = np.linalg.norm(orb.x, axis=1)
    assert r[3] < r[0]


# ---------------------------------------------------------------------------
# Lifted time direction
# ---------------------------------------------------------------------------

def test_lift_signs_split_between_families(unit_vortex):
    orb_p = integrate_planar_orbit(unit_vortex, np.array([1.3, 0.0]), "+",
                                   15.0, RayOptions(detect_cycle=False))
    orb_m = integrate_planar_orbit(unit_vortex, np.array([1.3, 0.0]), "-",
                                   0.8, RayOptions(detect_cycle=False,
                                                   r_bounds=(0.4, 5.0)))
    rates_p = lift_time_direction(unit_vortex, orb_p)
    rates_m = lift_time_direction(unit_vortex, orb_m)
    assert np.all(rates_p[np.isfinite(rates_p)] > 0)
    assert np.all(rates_m[np.isfinite(rates_m)] < 0)


def test_lift_sign_matches_ray_integration(unit_vortex):
    # oracle: integrate the actual forward ray and compare the sense of
    # traversal of its spatial projection with the orbit parameter
    x0 = np.array([1.2, 0.0])
    pair = spatial_null_covectors(unit_vortex, x0)
    ray = integrate_ray(
        unit_vortex, null_phase_point(unit_vortex, x0, pair.xi_plus),
        0.2, RayOptions(r_bounds=(0.4, 5.0)))
    # forward ray moves counterclockwise here; + family orbit does too
    th_ray = np.unwrap(np.arctan2(ray.x[:, 1], ray.x[:, 0]))
    assert th_ray[-1] > th_ray[0]
    orb = integrate_planar_orbit(unit_vortex, x0, "+", 0.5,
                                 RayOptions(detect_cycle=False))
    th_orb = np.unwrap(np.arctan2(orb.x[:, 1], orb.x[:, 0]))
    assert th_orb[-1] > th_orb[0]
    assert np.all(lift_time_direction(unit_vortex, orb) > 0)


# ---------------------------------------------------------------------------
# Consistency between descriptions
# ---------------------------------------------------------------------------

def _matched_arclength_distance(path_a: np.ndarray, path_b: np.ndarray) -> float:
    """Max pointwise distance after arc-length reparametrization."""
    def arclen(p):
        seg = np.linalg.norm(np.diff(p, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(seg)])

    sa, sb = arclen(path_a), arclen(path_b)
    smax = min(sa[-1], sb[-1])
    grid = np.linspace(0.0, smax, 2000)
    ax = np.interp(grid, sa, path_a[:, 0])
    ay = np.interp(grid, sa, path_a[:, 1])
    bx = np.interp(grid, sb, path_b[:, 0])
    by = np.interp(grid, sb, path_b[:, 1])
    return float(np.max(np.hypot(ax - bx, ay - by)))


def test_ray_orbit_reparametrization_consistency(unit_vortex):
    x0 = np.array([1.2, 0.0])
    pair = spatial_null_covectors(unit_vortex, x0)
    # inward (+) family: forward ray and orbit trace the same spiral
    ray_p = integrate_ray(
        unit_vortex, null_phase_point(unit_vortex, x0, pair.xi_plus),
        2.0, RayOptions(r_bounds=(0.05, 5.0), xi_budget=30.0, sample_ds=1e-4))
    orb_p = integrate_planar_orbit(
        unit_vortex, x0, "+", 30.0,
        RayOptions(detect_cycle=False, max_step=2e-3))
    assert _matched_arclength_distance(ray_p.x, orb_p.x) < 1e-6
    # outward (-) family: the forward ray runs against the field, so the
    # backward ray retraces the orbit
    ray_m = integrate_ray(
        unit_vortex, null_phase_point(unit_vortex, x0, pair.xi_minus),
        -2.0, RayOptions(r_bounds=(0.4, 5.0), sample_ds=1e-4))
    orb_m = integrate_planar_orbit(
        unit_vortex, x0, "-", 2.0,
        RayOptions(detect_cycle=False, max_step=2e-3, r_bounds=(0.4, 5.0)))
    assert _matched_arclength_distance(ray_m.x, orb_m.x) < 1e-6


def test_orbit_matches_scalar_radial_oracle(unit_vortex):
    # oracle: dr/dtheta from the closed-form polar rates, integrated
    # independently with a scalar solver
    A = B = 1.0

    def drdth(th, r):
        root = math.sqrt(max(A * A + B * B - r[0] ** 2, 0.0))
        return [(A * A - r[0] ** 2) / (A * B / r[0] + root)]

    sol = solve_ivp(drdth, (0.0, 2.0), [1.3], rtol=1e-12, atol=1e-12,
                    dense_output=True)
    orb = integrate_planar_orbit(unit_vortex, np.array([1.3, 0.0]), "+", 5.0,
                                 RayOptions(detect_cycle=False))
    th = np.unwrap(np.arctan2(orb.x[:, 1], orb.x[:, 0]))
    r = np.linalg.norm(orb.x, axis=1)
    keep = th <= 2.0
    r_oracle = sol.sol(th[keep])[0]
    assert np.max(np.abs(r[keep] - r_oracle)) < 1e-7
