"""Ergosphere location and event-horizon detection via return maps.

The ergosphere is found by bisecting the spatial determinant along probe
rays from the origin.  Horizons are closed characteristic curves, i.e.
limit cycles of the planar characteristic direction fields; they are
located constructively as fixed points of the Poincare return map of a
radial section.  Both families are searched, in both orientations, so
attracting and repelling cycles are found by the same scan.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .chargeo import (
    HoleClass,
    characteristic_residual,
    classify_hole,
    curve_is_simple,
    flow_alignment_condition,
    frame_field,
    inner_boundary_condition,
)
from .errors import NoReturn, NoSignChange, NotInErgoregion
from .metrics import FlowSpec, SpacetimeMetric, spatial_det
from .rays import RayOptions, _det_clamped
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "PoincareSection",
    "LimitCycle",
    "HorizonReport",
    "ergosphere_locus",
    "return_map",
    "find_limit_cycles",
    "horizon_report",
]


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoincareSection:
    """A radial section ray used for return-map evaluation."""

    theta0: float
    r_window: tuple[float, float]
    family: str = "+"
    orientation: float = 1.0


@dataclass(frozen=True)
class LimitCycle:
    """A closed orbit of one characteristic family (a horizon generator)."""

    curve: np.ndarray          # (N, 2) closed sample array
    fixed_r: float             # section crossing radius
    period_sigma: float
    stability: float           # |P'(r*)| for the orientation that found it
    family: str
    orientation: float
    fixed_point_residual: float
    char_residual: float

    def to_dict(self) -> dict:
        return {
            "fixed_r": self.fixed_r,
            "period_sigma": self.period_sigma,
            "stability": self.stability,
            "family": self.family,
            "orientation": self.orientation,
            "fixed_point_residual": self.fixed_point_residual,
            "char_residual": self.char_residual,
        }


@dataclass(frozen=True)
class HorizonReport:
    """Ergosphere locus, detected cycles, and their classifications."""

    ergosphere: np.ndarray
    cycles: list[LimitCycle]
    classes: list[HoleClass]
    inner_condition: str | None = None
    flow_condition: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "ergosphere": [[float(a), float(b)] for a, b in self.ergosphere],
            "cycles": [
                dict(c.to_dict(), **{"class": k.kind, "margin": k.margin})
                for c, k in zip(self.cycles, self.classes)
            ],
            "inner_condition": self.inner_condition,
        }
        if self.flow_condition is not None:
            out["flow_condition"] = self.flow_condition
        return out


# ---------------------------------------------------------------------------
# Ergosphere locus
# ---------------------------------------------------------------------------

def ergosphere_locus(metric: SpacetimeMetric,
                     search_annulus: tuple[float, float],
                     n_probes: int = 64,
                     tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Locate the ``Delta = 0`` locus along ``n_probes`` radial probe rays.

    The spatial determinant must change sign across the annulus on every
    probe; each root is bracketed and refined to near machine precision.
    Returns the closed curve of roots, ordered by angle.
    """
    r_lo, r_hi = search_annulus
    if not (0 < r_lo < r_hi):
        raise ValueError("search annulus must satisfy 0 < r_lo < r_hi")
    angles = np.linspace(0.0, 2.0 * math.pi, n_probes, endpoint=False)
    pts = np.empty((n_probes, 2))
    for i, ang in enumerate(angles):
        e = np.array([math.cos(ang), math.sin(ang)])

        def f(r, e=e):
            return float(spatial_det(metric, r * e))

        f_lo, f_hi = f(r_lo), f(r_hi)
        if f_lo == 0.0:
            root = r_lo
        elif f_hi == 0.0:
            root = r_hi
        elif (f_lo > 0) == (f_hi > 0):
            raise NoSignChange(
                f"no sign change of the spatial determinant on the probe at "
                f"angle {ang:.6f} rad ({f_lo:.3e} .. {f_hi:.3e})",
                angle=float(ang),
            )
        else:
            root = brentq(f, r_lo, r_hi, xtol=1e-14, rtol=8.9e-16)
        pts[i] = root * e
    return pts


# ---------------------------------------------------------------------------
# Return map
# ---------------------------------------------------------------------------

def _first_return(metric: SpacetimeMetric, section: PoincareSection, r: float,
                  opts: RayOptions, tol: Tolerances,
                  sigma_budget: float | None):
    """First same-orientation section crossing: ``(radius, sigma, state)``."""
    th0 = section.theta0
    e = np.array([math.cos(th0), math.sin(th0)])
    x0 = r * e
    if float(spatial_det(metric, x0)) > -tol.ergo:
        raise NoReturn(f"section point r={r:.6g} is not strictly inside the ergoregion")
    f = frame_field(metric, section.family, section.orientation, tol)
    v0 = f(x0)
    omega0 = (x0[0] * v0[1] - x0[1] * v0[0]) / (r * r)
    if abs(omega0) < 1e-12:
        raise NoReturn("orbit starts tangent to the section ray")
    direction = math.copysign(1.0, omega0)
    ct0, st0 = math.cos(th0), math.sin(th0)

    def crossing(sigma, y):
        # sin(theta(y) - theta0), scaled by radius to stay smooth at the origin
        return (y[1] * ct0 - y[0] * st0)

    crossing.direction = direction

    def exit_event(sigma, y):
        return _det_clamped(metric, y)

    exit_event.terminal = True
    exit_event.direction = 1.0

    lo = max(metric.domain.r_min, 1e-3)
    hi = min(metric.domain.r_max, 1e6)

    def lower(sigma, y):
        return math.hypot(y[0], y[1]) - lo

    lower.terminal = True

    def upper(sigma, y):
        return hi - math.hypot(y[0], y[1])

    upper.terminal = True

    if sigma_budget is None:
        sigma_budget = 1e3 * 2.0 * section.r_window[1]
    max_step = opts.max_step
    if not math.isfinite(max_step):
        max_step = 0.3 * max(min(1.0, r), 0.05)

    chunk = 4.0 * math.pi * max(r, section.r_window[1])
    s_cur = 0.0
    y_cur = x0.copy()
    while s_cur < sigma_budget:
        s_next = min(s_cur + chunk, sigma_budget)
        sol = solve_ivp(lambda s, y: f(y), (s_cur, s_next), y_cur,
                        method="RK45", rtol=opts.rtol, atol=opts.atol,
                        events=[crossing, exit_event, lower, upper],
                        max_step=max_step)
        if not sol.success:
            raise NoReturn(f"orbit integration failed: {sol.message}")
        for sig, state in zip(sol.t_events[0], sol.y_events[0]):
            if sig <= s_cur + 1e-9:
                continue
            # same ray, not the antipodal one
            if state[0] * ct0 + state[1] * st0 > 0:
                return float(np.hypot(state[0], state[1])), float(sig), state
        if sol.status == 1:
            raise NoReturn(
                "orbit left the ergoregion or the domain before returning"
            )
        s_cur = float(sol.t[-1])
        y_cur = sol.y[:, -1].copy()
    raise NoReturn(f"no section return within the budget sigma={sigma_budget:.3g}")


def return_map(metric: SpacetimeMetric, section: PoincareSection, r: float,
               opts: RayOptions = RayOptions(),
               tol: Tolerances = DEFAULT_TOL,
               sigma_budget: float | None = None) -> float:
    """Radius of the orbit's first same-orientation return to the section.

    The crossing is located by the integrator's event root-finder on the
    dense solution (far below the 1e-12 parameter tolerance).  Raises
    :class:`NoReturn` when the orbit leaves the ergoregion or exhausts its
    budget, which is itself informative: trapped-family orbits never reach
    the inner boundary.
    """
    radius, _, _ = _first_return(metric, section, r, opts, tol, sigma_budget)
    return radius


# ---------------------------------------------------------------------------
# Cycle search
# ---------------------------------------------------------------------------

_SCAN_OPTS = RayOptions(rtol=1e-7, atol=1e-9)
_REFINE_OPTS = RayOptions(rtol=1e-11, atol=1e-12)


def _cycle_curve(metric: SpacetimeMetric, section: PoincareSection,
                 r_star: float, tol: Tolerances, n_curve: int,
                 refine_opts: RayOptions = _REFINE_OPTS) -> tuple[np.ndarray, float]:
    """Integrate one full cycle and resample it uniformly in arc length."""
    _, period, _ = _first_return(metric, section, r_star, refine_opts, tol, None)
    th0 = section.theta0
    x0 = r_star * np.array([math.cos(th0), math.sin(th0)])
    f = frame_field(metric, section.family, section.orientation, tol)
    sigma_eval = np.linspace(0.0, period, n_curve, endpoint=False)
    sol = solve_ivp(lambda s, y: f(y), (0.0, period), x0, method="RK45",
                    rtol=refine_opts.rtol, atol=refine_opts.atol,
                    t_eval=sigma_eval, max_step=0.3 * max(min(1.0, r_star), 0.05))
    if not sol.success:
        raise NoReturn(f"cycle curve integration failed: {sol.message}")
    return sol.y.T.copy(), period


def find_limit_cycles(metric: SpacetimeMetric, section: PoincareSection,
                      scan: np.ndarray | None = None,
                      tol: Tolerances = DEFAULT_TOL,
                      n_curve: int = 256,
                      search_reversed: bool = True,
                      scan_opts: RayOptions = _SCAN_OPTS,
                      refine_opts: RayOptions = _REFINE_OPTS) -> list[LimitCycle]:
    """Locate limit cycles of one family as fixed points of the return map.

    Scans ``P(r) - r`` for sign changes over the window, refines each
    bracket, then integrates the closed curve and estimates the stability
    ``|P'(r*)|`` by central differences.  The reversed-orientation scan
    finds repelling cycles (attracting for the reversed field); duplicates
    are merged within 1e-6.  Returns an empty list when nothing is found.
    """
    r_lo, r_hi = section.r_window
    if scan is None:
        scan = np.linspace(r_lo, r_hi, 64)
    orientations = (1.0, -1.0) if search_reversed else (section.orientation,)
    budget = 40.0 * math.pi * r_hi

    candidates = []
    for orientation in orientations:
        sec = replace(section, orientation=orientation)

        def F(r, sec=sec):
            return return_map(metric, sec, r, scan_opts, tol, budget) - r

        values = []
        for r in scan:
            try:
                values.append(F(float(r)))
            except NoReturn:
                values.append(None)
        for (ra, va), (rb, vb) in zip(zip(scan, values), zip(scan[1:], values[1:])):
            if va is None or vb is None or (va > 0) == (vb > 0):
                continue

            def F_fine(r, sec=sec):
                return return_map(metric, sec, r, refine_opts, tol, budget) - r

            try:
                r_star = brentq(F_fine, float(ra), float(rb),
                                xtol=1e-12, rtol=8.9e-16)
                resid = abs(F_fine(r_star))
                delta = 1e-6 * (1.0 + r_star)
                p_prime = abs(
                    (F_fine(r_star + delta) + (r_star + delta)
                     - F_fine(r_star - delta) - (r_star - delta))
                    / (2.0 * delta)
                )
            except NoReturn:
                warnings.warn(
                    f"return map lost the orbit while refining near "
                    f"r={0.5 * (ra + rb):.6g}; candidate skipped"
                )
                continue
            if resid > tol.cycle:
                continue
            candidates.append((r_star, resid, p_prime, sec))

    candidates.sort(key=lambda c: (c[0], c[2], -c[3].orientation))
    cycles: list[LimitCycle] = []
    for r_star, resid, p_prime, sec in candidates:
        if any(abs(r_star - c.fixed_r) < 1e-6 and c.family == sec.family
               for c in cycles):
            continue
        curve, period = _cycle_curve(metric, sec, r_star, tol, n_curve, refine_opts)
        gap = float(np.linalg.norm(curve[0] - curve[-1]))
        seg = float(np.median(np.linalg.norm(np.diff(curve, axis=0), axis=1)))
        if gap > 5.0 * seg or not curve_is_simple(curve):
            warnings.warn(f"discarding non-closed or self-crossing orbit at r={r_star:.6g}")
            continue
        cycles.append(LimitCycle(
            curve=curve,
            fixed_r=float(r_star),
            period_sigma=float(period),
            stability=float(p_prime),
            family=sec.family,
            orientation=float(sec.orientation),
            fixed_point_residual=float(resid),
            char_residual=float(characteristic_residual(curve, metric)),
        ))
    cycles.sort(key=lambda c: c.fixed_r)
    return cycles


# ---------------------------------------------------------------------------
# Full report
# ---------------------------------------------------------------------------

def _transverse_theta0(metric: SpacetimeMetric, theta0: float,
                       window: tuple[float, float], family: str,
                       tol: Tolerances) -> float:
    """Rotate the section until the family field is transverse along it.

    For axisymmetric metrics a tangency radius is rotation-invariant; the
    scan tolerates such isolated radii, so the requested angle is kept when
    no rotation removes them.
    """
    f = frame_field(metric, family, 1.0, tol)
    for k in range(8):
        th = theta0 + k * math.pi / 7.0
        e = np.array([math.cos(th), math.sin(th)])
        that = np.array([-e[1], e[0]])
        ok = True
        for r in np.linspace(window[0], window[1], 9):
            x = r * e
            if float(spatial_det(metric, x)) > -tol.ergo:
                continue
            if abs(float(f(x) @ that)) < 1e-2:
                ok = False
                break
        if ok:
            return th
    return theta0


def horizon_report(metric: SpacetimeMetric,
                   search_annulus: tuple[float, float],
                   theta0: float = 0.0,
                   cycle_window: tuple[float, float] | None = None,
                   scan_n: int = 64,
                   n_probes: int = 64,
                   families: tuple[str, ...] = ("+", "-"),
                   s1_radius: float | None = None,
                   flow: FlowSpec | None = None,
                   n_curve: int = 256,
                   tol: Tolerances = DEFAULT_TOL) -> HorizonReport:
    """Assemble the ergosphere locus, limit cycles, and classifications.

    ``cycle_window`` defaults to the span from the inner search radius up
    to just inside the detected locus.  When ``s1_radius`` is given the
    inner-boundary cone condition is evaluated on that circle; when a flow
    is given the alignment threshold test is evaluated there as well.
    """
    locus = ergosphere_locus(metric, search_annulus, n_probes, tol)
    locus_radii = np.linalg.norm(locus, axis=1)
    if cycle_window is None:
        cycle_window = (search_annulus[0], 0.98 * float(np.min(locus_radii)))

    cycles: list[LimitCycle] = []
    for family in families:
        th = _transverse_theta0(metric, theta0, cycle_window, family, tol)
        section = PoincareSection(theta0=th, r_window=cycle_window,
                                  family=family)
        cycles.extend(find_limit_cycles(
            metric, section, np.linspace(*cycle_window, scan_n), tol, n_curve))
    cycles.sort(key=lambda c: c.fixed_r)

    classes = [classify_hole(c.curve, metric, tol) for c in cycles]

    inner_condition = None
    flow_condition = None
    if s1_radius is not None:
        th = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
        s1 = s1_radius * np.stack([np.cos(th), np.sin(th)], axis=1)
        try:
            inner_condition = inner_boundary_condition(metric, s1, tol)
        except NotInErgoregion:
            inner_condition = "not_in_ergoregion"
        if flow is not None:
            flow_condition = flow_alignment_condition(flow, s1)

    return HorizonReport(
        ergosphere=locus,
        cycles=cycles,
        classes=classes,
        inner_condition=inner_condition,
        flow_condition=flow_condition,
    )
