"""Null bicharacteristics and planar characteristic orbits.

Rays follow the Hamiltonian flow of ``H(x, xi) = sum g^{jk}(x) xi_j xi_k``:

    dx_j/ds  = 2 sum_k g^{jk} xi_k,
    dxi_p/ds = - sum_{j,k} (d g^{jk}/dx_p) xi_j xi_k,

with the time covector ``xi_0`` exactly constant because the coefficients
do not depend on time.  Planar orbits integrate the unit characteristic
direction fields ``f+`` / ``f-`` inside the ergoregion; their parameter is
Euclidean arc length.  The two descriptions agree: the spatial projection
of a null ray started with a zero time covector traces the same curve as
the planar orbit of its family, up to reparametrization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from .chargeo import _char_data, frame_field
from .errors import ConstraintDrift, NotCharacteristic, NotInErgoregion, ZeroRoot
from .metrics import SpacetimeMetric, spatial_det
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "PhasePoint",
    "RayPath",
    "PlanarOrbit",
    "RayOptions",
    "hamiltonian",
    "time_roots",
    "null_phase_point",
    "integrate_ray",
    "integrate_planar_orbit",
    "lift_time_direction",
    "project_null",
]


# ---------------------------------------------------------------------------
# Phase-space containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PhasePoint:
    """A point ``(x0, x, xi0, xi)`` in extended phase space."""

    x0: float
    x: np.ndarray
    xi0: float
    xi: np.ndarray


@dataclass(frozen=True)
class RayPath:
    """An integrated null bicharacteristic with constraint residuals."""

    s: np.ndarray
    x0: np.ndarray
    x: np.ndarray          # (N, 2)
    xi0: np.ndarray        # constant to machine precision
    xi: np.ndarray         # (N, 2)
    h_residuals: np.ndarray
    termination: str       # LeftDomain | MaxSteps | ReachedTime | StagnationDetected

    def point(self, i: int) -> PhasePoint:
        return PhasePoint(float(self.x0[i]), self.x[i].copy(),
                          float(self.xi0[i]), self.xi[i].copy())

    def __len__(self) -> int:
        return len(self.s)


@dataclass(frozen=True)
class PlanarOrbit:
    """An orbit of one characteristic direction field in the plane."""

    sigma: np.ndarray
    x: np.ndarray          # (N, 2)
    family: str            # "+" or "-"
    orientation: float     # +1 along the field, -1 reversed
    x0_lift: np.ndarray    # accumulated time along the lifted forward ray
    termination: str       # LeftErgoregion | LeftDomain | MaxSigma | ConvergedToCycle

    def __len__(self) -> int:
        return len(self.sigma)


@dataclass(frozen=True)
class RayOptions:
    """Integration options shared by rays and orbits."""

    rtol: float = 1e-10
    atol: float = 1e-10
    max_step: float = math.inf
    r_bounds: tuple[float, float] | None = None
    x0_target: float | None = None
    project_ds: float | None = None   # re-project onto H = 0 every ds
    detect_cycle: bool = True
    cycle_tol: float = 1e-10
    xi_budget: float = 1e6            # covector blowup cutoff (horizon wrap)
    sample_ds: float | None = None    # fixed-parameter output sampling


# ---------------------------------------------------------------------------
# Hamiltonian machinery
# ---------------------------------------------------------------------------

def hamiltonian(metric: SpacetimeMetric, p: PhasePoint) -> float:
    """Full quadratic ``sum_{j,k=0..n} g^{jk}(x) xi_j xi_k`` at the phase point."""
    g = metric.eval(p.x)
    xi = np.concatenate([[p.xi0], np.asarray(p.xi, dtype=float)])
    return float(xi @ g @ xi)


def time_roots(metric: SpacetimeMetric, x: np.ndarray,
               xi: np.ndarray) -> tuple[float, float]:
    """The two real time-covector roots closing ``(xi_0, xi)`` to a null covector."""
    g = metric.eval(x)
    xi = np.asarray(xi, dtype=float)
    a = g[0, 0]
    b = float(g[0, 1:] @ xi)
    c = float(xi @ g[1:, 1:] @ xi)
    disc = b * b - a * c
    if disc < 0:
        raise NotCharacteristic("no real time roots: metric not hyperbolic here?")
    sq = math.sqrt(disc)
    # numerically stable quadratic roots
    if b >= 0:
        r1 = (-b - sq) / a
    else:
        r1 = (-b + sq) / a
    r2 = (c / (a * r1)) if r1 != 0 else (-2.0 * b / a)
    return (r1, r2) if r1 <= r2 else (r2, r1)


def null_phase_point(metric: SpacetimeMetric, x: np.ndarray, xi: np.ndarray,
                     x0: float = 0.0, planar: bool = True,
                     forward: bool = True) -> PhasePoint:
    """Build a null phase point over ``x`` from a spatial covector ``xi``.

    With ``planar=True`` the covector must already be spatially null and the
    time component is zero (the planar-orbit lift).  Otherwise ``xi0`` is
    the time root making the full covector null, picked so the ray moves
    forward in time when ``forward=True``.
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if planar:
        p = PhasePoint(x0, x, 0.0, xi)
        return p
    g = metric.eval(x)
    best = None
    for root in time_roots(metric, x, xi):
        rate = 2.0 * (g[0, 0] * root + float(g[0, 1:] @ xi))
        if (rate > 0) == forward and (best is None or abs(rate) > abs(best[1])):
            best = (root, rate)
    if best is None:
        raise ZeroRoot("no time root with the requested time orientation")
    return PhasePoint(x0, x, best[0], xi)


def project_null(metric: SpacetimeMetric, x: np.ndarray, xi0: float,
                 xi: np.ndarray) -> tuple[float, np.ndarray]:
    """Project ``(xi0, xi)`` back onto the null cone at ``x``.

    For ``xi0 != 0`` the time component is reset to the exact quadratic
    root nearest its current value; for ``xi0 = 0`` one Newton step moves
    the spatial covector along the constraint gradient.
    """
    xi = np.asarray(xi, dtype=float)
    g = metric.eval(x)
    if abs(xi0) > 1e-14:
        roots = time_roots(metric, x, xi)
        xi0_new = min(roots, key=lambda r: abs(r - xi0))
        return xi0_new, xi
    sp = g[1:, 1:]
    h = float(xi @ sp @ xi)
    grad = 2.0 * sp @ xi
    gg = float(grad @ grad)
    if gg > 0:
        xi = xi - h * grad / gg
    return 0.0, xi


# ---------------------------------------------------------------------------
# Ray integration
# ---------------------------------------------------------------------------

def _ray_bounds(metric: SpacetimeMetric,
                opts: RayOptions) -> tuple[float, float]:
    # Default bounds stay clear of extreme flow speeds near the origin,
    # where the family structure falls below double-precision resolution.
    if opts.r_bounds is not None:
        return opts.r_bounds
    lo = max(metric.domain.r_min, 1e-3)
    hi = metric.domain.r_max if metric.domain.bounded else math.inf
    return lo, hi


def _boundary_events(lo: float, hi: float) -> list:
    events = []
    if lo > 0.0:
        def lower(s, y, lo=lo):
            return math.hypot(y[1], y[2]) - lo
        lower.terminal = True
        events.append(lower)
    if math.isfinite(hi):
        def upper(s, y, hi=hi):
            return hi - math.hypot(y[1], y[2])
        upper.terminal = True
        events.append(upper)
    return events


def _det_clamped(metric: SpacetimeMetric, x: np.ndarray) -> float:
    g = metric.eval_clamped(x)
    return float(g[1, 1] * g[2, 2] - g[1, 2] ** 2)


def integrate_ray(metric: SpacetimeMetric, p0: PhasePoint, s_max: float,
                  opts: RayOptions = RayOptions(),
                  tol: Tolerances = DEFAULT_TOL) -> RayPath:
    """Integrate the null bicharacteristic through ``p0`` up to parameter ``s_max``.

    The time covector is carried as an exact constant.  Stops at the radial
    bounds, at ``opts.x0_target`` if set, or at ``s_max``.  The Hamiltonian
    residual is monitored along the path; if it exceeds ten times the null
    tolerance the integration is retried with tighter error control before
    raising :class:`ConstraintDrift`.
    """
    h0 = hamiltonian(metric, p0)
    if abs(h0) > tol.null:
        raise NotCharacteristic(
            f"initial covector is not null: |H| = {abs(h0):.3e} > {tol.null:.1e}"
        )
    xi0 = float(p0.xi0)
    lo, hi = _ray_bounds(metric, opts)

    def rhs(s, y):
        x = y[1:3]
        g = metric.eval_clamped(x)
        xi = np.array([xi0, y[3], y[4]])
        dx = 2.0 * g @ xi
        dstack = metric.deriv_stack(x)
        dxi = -np.einsum("pjk,j,k->p", dstack, xi, xi)
        return (dx[0], dx[1], dx[2], dxi[0], dxi[1])

    events = _boundary_events(lo, hi)
    n_boundary = len(events)

    def blowup(s, y):
        return opts.xi_budget - max(abs(y[3]), abs(y[4]))

    blowup.terminal = True
    events.append(blowup)
    reached_idx = None
    if opts.x0_target is not None:
        def reached(s, y, target=opts.x0_target):
            return y[0] - target
        reached.terminal = True
        reached_idx = len(events)
        events.append(reached)

    y0 = np.array([p0.x0, p0.x[0], p0.x[1], p0.xi[0], p0.xi[1]])

    def run(rtol, atol):
        if opts.project_ds is None:
            segs = [(0.0, s_max)]
        else:
            if s_max < 0:
                raise ValueError("project_ds is not supported for backward rays")
            edges = np.arange(0.0, s_max, opts.project_ds).tolist() + [s_max]
            segs = list(zip(edges[:-1], edges[1:]))
        ts, ys = [np.array([0.0])], [y0[:, None]]
        y_cur = y0.copy()
        status_txt = "MaxSteps"
        for (s_a, s_b) in segs:
            t_eval = None
            if opts.sample_ds is not None:
                step = math.copysign(opts.sample_ds, s_b - s_a)
                t_eval = np.arange(s_a, s_b, step)
                if len(t_eval) == 0 or t_eval[-1] != s_b:
                    t_eval = np.append(t_eval, s_b)
            sol = solve_ivp(rhs, (s_a, s_b), y_cur, method="RK45",
                            rtol=rtol, atol=atol, events=events,
                            t_eval=t_eval, max_step=opts.max_step,
                            dense_output=False)
            if not sol.success:
                raise ConstraintDrift(f"ray integrator failed: {sol.message}")
            keep = sol.t > ts[-1][-1] if len(ts[-1]) else slice(1, None)
            ts.append(sol.t[keep])
            ys.append(sol.y[:, keep])
            y_cur = sol.y[:, -1].copy()
            if sol.status == 1:
                if opts.sample_ds is not None:
                    # with fixed sampling the event point is not in sol.y
                    hit = [(te[-1], ye[-1]) for te, ye in
                           zip(sol.t_events, sol.y_events) if len(te)]
                    te, ye = min(hit, key=lambda h: abs(h[0]))
                    if len(ts[-1]) == 0 or te != ts[-1][-1]:
                        ts.append(np.array([te]))
                        ys.append(np.asarray(ye)[:, None])
                        y_cur = np.asarray(ye).copy()
                if reached_idx is not None and len(sol.t_events[reached_idx]) > 0:
                    status_txt = "ReachedTime"
                elif len(sol.t_events[n_boundary]) > 0:
                    status_txt = "StagnationDetected"
                else:
                    status_txt = "LeftDomain"
                break
            if opts.project_ds is not None:
                _, xi_new = project_null(metric, y_cur[1:3], xi0, y_cur[3:5])
                y_cur[3:5] = xi_new
                ys[-1][:, -1] = y_cur
        return np.concatenate(ts), np.concatenate(ys, axis=1), status_txt

    s_arr, y_arr, termination = run(opts.rtol, opts.atol)

    def residuals(s_arr, y_arr):
        out = np.empty(len(s_arr))
        for i in range(len(s_arr)):
            p = PhasePoint(y_arr[0, i], y_arr[1:3, i], xi0, y_arr[3:5, i])
            out[i] = hamiltonian(metric, p)
        return out

    def scaled_max(res, y_arr):
        # H is homogeneous quadratic in the covector: compare against |xi|^2
        xi2 = xi0**2 + y_arr[3] ** 2 + y_arr[4] ** 2
        return float(np.max(np.abs(res) / np.maximum(1.0, xi2)))

    res = residuals(s_arr, y_arr)
    if scaled_max(res, y_arr) > 10.0 * tol.null:
        s_arr, y_arr, termination = run(opts.rtol * 1e-3, opts.atol * 1e-3)
        res = residuals(s_arr, y_arr)
        if scaled_max(res, y_arr) > 10.0 * tol.null:
            raise ConstraintDrift(
                f"null residual {scaled_max(res, y_arr):.3e} (covector-scaled) "
                f"exceeds {10.0 * tol.null:.1e} after step-size reduction"
            )

    return RayPath(
        s=s_arr,
        x0=y_arr[0],
        x=y_arr[1:3].T.copy(),
        xi0=np.full(len(s_arr), xi0),
        xi=y_arr[3:5].T.copy(),
        h_residuals=res,
        termination=termination,
    )


# ---------------------------------------------------------------------------
# Planar orbits
# ---------------------------------------------------------------------------

def integrate_planar_orbit(metric: SpacetimeMetric, x_start: np.ndarray,
                           family: str, sigma_max: float,
                           opts: RayOptions = RayOptions(),
                           tol: Tolerances = DEFAULT_TOL,
                           orientation: float = 1.0) -> PlanarOrbit:
    """Integrate ``dx/dsigma = f_family(x)`` from a point of the closed ergoregion.

    Terminates when the orbit leaves the ergoregion (the determinant
    crossing is located by the event root-finder), at ``sigma_max``, at the
    radial bounds, or when successive windings converge onto a cycle
    (``opts.detect_cycle``).
    """
    x_start = np.asarray(x_start, dtype=float)
    d0 = float(spatial_det(metric, x_start))
    if d0 > tol.ergo:
        raise NotInErgoregion(
            f"orbit start has Delta = {d0:.3e} > 0 (outside the closed ergoregion)"
        )
    f = frame_field(metric, family, orientation, tol)
    if abs(d0) <= tol.ergo:
        # nudge off the degenerate locus so the exit event starts clean
        x_start = x_start + 1e-7 * (1.0 + np.linalg.norm(x_start)) * f(x_start)

    lo, hi = _ray_bounds(metric, opts)

    def rhs(sigma, y):
        return f(y)

    def exit_event(sigma, y):
        return _det_clamped(metric, y)

    exit_event.terminal = True
    exit_event.direction = 1.0

    bnd_events = []
    if lo > 0.0:
        def lower(sigma, y, lo=lo):
            return math.hypot(y[0], y[1]) - lo
        lower.terminal = True
        bnd_events.append(lower)
    if math.isfinite(hi):
        def upper(sigma, y, hi=hi):
            return hi - math.hypot(y[0], y[1])
        upper.terminal = True
        bnd_events.append(upper)

    max_step = opts.max_step
    if not math.isfinite(max_step):
        max_step = 0.25 * max(min(1.0, np.linalg.norm(x_start)), 0.05)

    chunk = min(sigma_max, max(2.0, sigma_max / 64.0))
    sig_list = [np.array([0.0])]
    pts_list = [x_start[:, None]]
    y_cur = x_start.copy()
    s_cur = 0.0
    termination = "MaxSigma"
    prev_theta = math.atan2(x_start[1], x_start[0])
    winding_prev = 0.0
    winding_radii: list[float] = []

    while s_cur < sigma_max - 1e-14:
        s_next = min(s_cur + chunk, sigma_max)
        sol = solve_ivp(rhs, (s_cur, s_next), y_cur, method="RK45",
                        rtol=opts.rtol, atol=opts.atol,
                        events=[exit_event] + bnd_events, max_step=max_step)
        if not sol.success:
            raise ConstraintDrift(f"orbit integrator failed: {sol.message}")
        sig_list.append(sol.t[1:])
        pts_list.append(sol.y[:, 1:])
        y_cur = sol.y[:, -1].copy()
        s_cur = float(sol.t[-1])
        converged = False
        if opts.detect_cycle:
            for k in range(1, sol.y.shape[1]):
                xx, yy = sol.y[0, k], sol.y[1, k]
                dth = math.atan2(yy, xx) - prev_theta
                dth = (dth + math.pi) % (2 * math.pi) - math.pi
                prev_theta += dth
                winding_new = winding_prev + dth / (2 * math.pi)
                if math.floor(winding_new) != math.floor(winding_prev):
                    winding_radii.append(math.hypot(xx, yy))
                    if len(winding_radii) >= 2 and \
                            abs(winding_radii[-1] - winding_radii[-2]) < opts.cycle_tol:
                        converged = True
                winding_prev = winding_new
                if converged:
                    break
        if sol.status == 1:
            hit_exit = len(sol.t_events[0]) > 0
            termination = "LeftErgoregion" if hit_exit else "LeftDomain"
            break
        if converged:
            termination = "ConvergedToCycle"
            break

    sigma = np.concatenate(sig_list)
    pts = np.concatenate(pts_list, axis=1).T.copy()
    orbit = PlanarOrbit(sigma=sigma, x=pts, family=family,
                        orientation=float(orientation),
                        x0_lift=np.zeros(len(sigma)), termination=termination)
    rates = lift_time_direction(metric, orbit, tol)
    x0_lift = np.concatenate([[0.0], np.cumsum(
        0.5 * (rates[1:] + rates[:-1]) * np.diff(sigma))])
    return replace(orbit, x0_lift=x0_lift)


def lift_time_direction(metric: SpacetimeMetric, orbit: PlanarOrbit,
                        tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Signed ``dx0/dsigma`` of the forward null lift along an orbit.

    At each sample the forward bicharacteristic whose spatial direction
    matches the orbit tangent determines the rate; the sign is positive
    when the orbit runs with its forward lift and negative against it.
    One family is uniformly positive and the other uniformly negative.
    """
    f = frame_field(metric, orbit.family, orbit.orientation, tol)
    rates = np.empty(len(orbit.sigma))
    for i, x in enumerate(orbit.x):
        g = metric.eval(x)
        data = _char_data(g, merge_tol=tol.ergo, clamp=True, atol=tol.ergo)
        tangent = f(x)
        if orbit.family == "+":
            u, rate, speed = data.u_p, data.rate_p, data.speed_p
        else:
            u, rate, speed = data.u_m, data.rate_m, data.speed_m
        if data.merged or speed <= 0.0:
            # infinite blueshift on the degenerate locus; report a signed inf
            rates[i] = math.copysign(math.inf, float(np.dot(tangent, u)))
            continue
        sign = float(np.dot(tangent, u))
        if abs(sign) < 1e-12:
            raise ZeroRoot("orbit tangent orthogonal to its lift direction")
        rates[i] = math.copysign(rate / speed, sign)
    return rates
