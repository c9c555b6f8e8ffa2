"""Boundary-data experiments: traces and nonuniqueness demonstrations.

The boundary map sends Dirichlet data on the outer rim to the weighted
conormal derivative of the solution,

    Lf = (g^{0r} u_t + g^{rr} u_r + g^{r theta} u_theta) / sqrt(-g^{rr}),

sampled over (time x azimuth).  Two experiments exercise its blind spots:

* a compactly supported metric perturbation hidden strictly inside a black
  hole leaves the exterior field and the trace unchanged in the continuum;
  discretely, both differences vanish at the scheme's order while the
  interior difference stays finite;
* for the slow-medium family, flipping the sign of a gradient flow
  ``v = grad b`` (with ``b = 0`` on the rim) produces the same trace, while
  a non-gradient flow does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    BoundaryPotentialNonzero,
    NormalizationDomainError,
    NotABlackHole,
    PerturbationLeak,
    SingularMetric,
)
from .metrics import (
    Domain,
    FlowSpec,
    SpacetimeMetric,
    potential_flow,
    slow_medium_metric,
)
from .wave.grid import AnnularGrid
from .wave.operators import cfl_dt, first_order_reduce
from .wave.solver import WaveOptions, WaveSolver, boundary_h1_norm

__all__ = [
    "DNTrace",
    "PerturbationSpec",
    "dn_trace",
    "nonuniqueness_experiment",
    "gradient_flow_pair",
    "fitted_order",
    "rotational_flow",
]


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DNTrace:
    """Sampled boundary-map data on the outer rim."""

    times: np.ndarray        # (n_rec,)
    thetas: np.ndarray       # (n_theta,)
    values: np.ndarray       # (n_rec, n_theta)
    forcing_id: str
    norm_h1: float

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def _rim_trace_row(solver: WaveSolver, state) -> np.ndarray:
    """One trace row from the current state (outer rim)."""
    op = solver.op
    grr = op.grr[-1]
    norm = -grr
    if np.any(norm <= 0):
        raise NormalizationDomainError(
            "outer rim lies inside the ergoregion: conormal normalization undefined"
        )
    dr = op.grid.dr
    u = state.u
    u_r = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dr)
    u_t = (np.roll(u[-1], -1) - np.roll(u[-1], 1)) / (2.0 * op.grid.dtheta)
    if solver.source is not None and solver.source.kind == "boundary_dirichlet":
        ut = solver.source.g_t(state.t, solver.grid.theta)
    else:
        ut = ((state.pi[-1] * op.inv_w[-1] - op.g0r[-1] * u_r
               - op.g0t[-1] * u_t) * op.inv_g00[-1])
    flux = op.g0r[-1] * ut + grr * u_r + op.grt[-1] * u_t
    return flux / np.sqrt(norm)


class _TraceRecorder:
    def __init__(self):
        self.times: list[float] = []
        self.rows: list[np.ndarray] = []
        self.forcing_rows: list[np.ndarray] = []

    def __call__(self, solver: WaveSolver, state) -> None:
        self.times.append(state.t)
        self.rows.append(_rim_trace_row(solver, state))
        if solver.source is not None and solver.source.kind == "boundary_dirichlet":
            self.forcing_rows.append(solver.source.g(state.t, solver.grid.theta))

    def trace(self, grid: AnnularGrid, forcing_id: str) -> DNTrace:
        times = np.asarray(self.times)
        values = np.asarray(self.rows)
        if self.forcing_rows:
            h1 = boundary_h1_norm(np.asarray(self.forcing_rows), times, grid.r_max)
        else:
            h1 = 0.0
        return DNTrace(times=times, thetas=grid.theta, values=values,
                       forcing_id=forcing_id, norm_h1=h1)


def dn_trace(metric: SpacetimeMetric, grid: AnnularGrid, forcing,
             t_end: float, opts: WaveOptions = WaveOptions()) -> DNTrace:
    """Run the forward problem and sample the boundary map on the rim.

    The time derivative on the rim is the analytic derivative of the
    Dirichlet data; the normal derivative is a one-sided second-order
    difference in radius.
    """
    op = first_order_reduce(metric, grid)
    solver = WaveSolver(op, forcing, opts)
    rec = _TraceRecorder()
    solver.run(t_end, recorders=(rec,))
    return rec.trace(grid, getattr(forcing, "kind", "custom"))


# ---------------------------------------------------------------------------
# Metric perturbations
# ---------------------------------------------------------------------------

_COEFF_INDEX = {
    "g00": (0, 0), "g01": (0, 1), "g02": (0, 2),
    "g11": (1, 1), "g12": (1, 2), "g22": (2, 2),
}


@dataclass(frozen=True)
class PerturbationSpec:
    """Smooth compactly supported bump added to one metric coefficient.

    Supported on the annulus ``r_inner < r < r_outer`` (a disk when
    ``r_inner = 0``); infinitely smooth, amplitude at the center of the
    support.  For hiding inside a horizon, ``r_outer`` must stay at least
    ``margin_cells`` grid cells below the horizon radius.
    """

    amplitude: float = 0.08
    r_outer: float = 0.6
    r_inner: float = 0.0
    coefficient: str = "g00"
    margin_cells: int = 2

    def __post_init__(self):
        if self.coefficient not in _COEFF_INDEX:
            raise ValueError(f"unknown coefficient {self.coefficient!r}")

    def bump(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.r_inner <= 0.0:
            s2 = (r / self.r_outer) ** 2
        else:
            mid = 0.5 * (self.r_inner + self.r_outer)
            half = 0.5 * (self.r_outer - self.r_inner)
            s2 = ((r - mid) / half) ** 2
        out = np.zeros_like(r)
        inside = s2 < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            out[inside] = math.e * np.exp(-1.0 / (1.0 - s2[inside]))
        return self.amplitude * out

    def apply(self, metric: SpacetimeMetric) -> SpacetimeMetric:
        j, k = _COEFF_INDEX[self.coefficient]

        def _eval(x):
            g = metric.eval_fn(np.asarray(x, dtype=float)).copy()
            b = self.bump(np.linalg.norm(x, axis=-1))
            g[..., j, k] += b
            if j != k:
                g[..., k, j] += b
            return g

        return SpacetimeMetric(metric.n_space, _eval, metric.domain,
                               name=metric.name + "+bump")

    def check_margin(self, horizon_radius: float, grid: AnnularGrid) -> None:
        margin = self.margin_cells * grid.dr
        if self.r_outer > horizon_radius - margin:
            raise PerturbationLeak(
                f"support radius {self.r_outer} violates the horizon margin "
                f"{horizon_radius} - {self.margin_cells} cells ({margin:.4f})"
            )

    def check_validity(self, metric: SpacetimeMetric, grid: AnnularGrid) -> None:
        rm, tm = grid.mesh()
        pts = np.stack([rm * np.cos(tm), rm * np.sin(tm)], axis=-1)
        g = metric.eval(pts)
        eig = np.linalg.eigvalsh(g)
        pos = np.sum(eig > 0, axis=-1)
        if np.any(g[..., 0, 0] <= 0) or np.any(pos != 1):
            raise SingularMetric(
                "perturbed metric loses the Lorentzian signature on the grid"
            )


# ---------------------------------------------------------------------------
# Paired runs
# ---------------------------------------------------------------------------

def _paired_run(m1: SpacetimeMetric, m2: SpacetimeMetric, grid: AnnularGrid,
                forcing, t_end: float, opts: WaveOptions,
                ext_mask_lo: float | None = None,
                int_mask_hi: float | None = None) -> dict:
    """Advance two operators in lockstep; collect trace and field differences."""
    op1 = first_order_reduce(m1, grid)
    op2 = first_order_reduce(m2, grid)
    dt = min(cfl_dt(op1, opts.safety), cfl_dt(op2, opts.safety))
    n_sub = max(1, int(math.ceil(opts.record_interval / dt)))
    dt = opts.record_interval / n_sub
    run_opts = WaveOptions(**{**opts.__dict__, "dt_override": dt})
    s1 = WaveSolver(op1, forcing, run_opts)
    s2 = WaveSolver(op2, forcing, run_opts)
    st1 = s1.initial_state()
    st2 = s2.initial_state()

    r = grid.r
    ext_rows = r > ext_mask_lo if ext_mask_lo is not None else slice(None)
    int_rows = r < int_mask_hi if int_mask_hi is not None else slice(0, 0)

    rec1, rec2 = _TraceRecorder(), _TraceRecorder()
    ext_diff = int_diff = 0.0
    rec1(s1, st1); rec2(s2, st2)
    n_rec = int(round(t_end / opts.record_interval))
    for _ in range(n_rec):
        for _ in range(n_sub):
            s1.step(st1, dt)
            s2.step(st2, dt)
        rec1(s1, st1); rec2(s2, st2)
        d = st1.u - st2.u
        ext_diff = max(ext_diff, float(np.max(np.abs(d[ext_rows]))))
        if int_mask_hi is not None:
            int_diff = max(int_diff, float(np.max(np.abs(d[int_rows]))))
    t1 = rec1.trace(grid, "pair")
    t2 = rec2.trace(grid, "pair")
    return {
        "dn_diff": float(np.max(np.abs(t1.values - t2.values))),
        "ext_diff": ext_diff,
        "int_diff": int_diff,
        "trace_1": t1,
        "trace_2": t2,
        "dt": dt,
        "h": max(grid.dr, grid.r_min * grid.dtheta),
    }


def fitted_order(hs, diffs) -> float:
    """Least-squares slope of log(diff) against log(h)."""
    hs = np.log(np.asarray(hs, dtype=float))
    ds = np.log(np.asarray(diffs, dtype=float))
    a = np.vstack([hs, np.ones_like(hs)]).T
    slope, _ = np.linalg.lstsq(a, ds, rcond=None)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def nonuniqueness_experiment(base_metric: SpacetimeMetric,
                             perturbation: PerturbationSpec,
                             forcing, grids: list[AnnularGrid],
                             t_end: float,
                             horizon_radius: float,
                             horizon_class: str,
                             opts: WaveOptions = WaveOptions(),
                             exterior_margin: float = 1.1) -> dict:
    """Hidden-perturbation experiment across a grid schedule.

    Runs the forward problem for the base operator and the perturbed one
    under identical forcing; reports trace and exterior-field differences
    per grid with fitted orders.  In the continuum both vanish: the
    operators differ only inside the black hole.  The exterior region
    starts at ``exterior_margin * horizon_radius``, clear of the
    evanescent skirt that hugs the horizon at finite resolution.
    """
    if horizon_class != "BlackHole":
        raise NotABlackHole(
            f"base metric classified as {horizon_class}; the hidden-perturbation "
            f"experiment needs a black hole"
        )
    perturbed = perturbation.apply(base_metric)
    results = []
    for grid in grids:
        perturbation.check_margin(horizon_radius, grid)
        perturbation.check_validity(perturbed, grid)
        results.append(_paired_run(
            base_metric, perturbed, grid, forcing, t_end, opts,
            ext_mask_lo=exterior_margin * horizon_radius,
            int_mask_hi=horizon_radius))
    hs = [r["h"] for r in results]
    report = {
        "grids": [[g.nr, g.nt] for g in grids],
        "h": hs,
        "dn_differences": [r["dn_diff"] for r in results],
        "exterior_differences": [r["ext_diff"] for r in results],
        "interior_differences": [r["int_diff"] for r in results],
        "dn_order": fitted_order(hs, [r["dn_diff"] for r in results]),
        "exterior_order": fitted_order(hs, [r["ext_diff"] for r in results]),
        "interior_over_finest_exterior": (
            results[-1]["int_diff"] / results[-1]["ext_diff"]
            if results[-1]["ext_diff"] > 0 else math.inf),
        "horizon_radius": horizon_radius,
    }
    return report


def rotational_flow(kappa: float, n_index: float, c: float = 1.0,
                    sign: float = 1.0) -> FlowSpec:
    """Divergence-free azimuthal flow whose time row is ``sign*kappa/r thetahat``.

    Closed but not exact on the annulus: locally the gradient of the
    (multivalued) azimuth, hence *not* a gradient flow of any single-valued
    potential.  Control case for the sign-flip experiment.
    """
    n2m1 = float(n_index) ** 2 - 1.0
    scale = sign * kappa * c / n2m1

    def _w(x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1, keepdims=True)
        return scale * np.stack([-x[..., 1], x[..., 0]], axis=-1) / r2

    return FlowSpec(
        w=_w,
        n_index=lambda x: np.full(np.shape(x)[:-1], float(n_index)),
        c=c,
        domain=Domain(1e-8, math.inf),
        name=f"rotational(kappa={kappa})",
    )


def gradient_flow_pair(b: Callable[[np.ndarray], np.ndarray],
                       grad_b: Callable[[np.ndarray], np.ndarray],
                       n_index: float,
                       grids: list[AnnularGrid],
                       forcing, t_end: float,
                       opts: WaveOptions = WaveOptions(),
                       control_kappa: float | None = None,
                       control_grids: list[AnnularGrid] | None = None) -> dict:
    """Sign-flip experiment for slow-medium gradient flows.

    Builds the metrics with time rows ``+grad b`` and ``-grad b`` (``b``
    must vanish on the outer rim), runs identical forcing, and reports the
    trace difference per grid with its fitted order.  Optionally runs the
    rotational (non-gradient) control, whose difference must not vanish.
    """
    rim = grids[0].r_max * np.stack(
        [np.cos(grids[0].theta), np.sin(grids[0].theta)], axis=-1)
    rim_b = np.max(np.abs(np.asarray(b(rim), dtype=float)))
    if rim_b > 1e-12:
        raise BoundaryPotentialNonzero(
            f"|b| = {rim_b:.3e} on the outer rim (must vanish)"
        )
    m_plus = slow_medium_metric(potential_flow(grad_b, n_index, sign=+1.0))
    m_minus = slow_medium_metric(potential_flow(grad_b, n_index, sign=-1.0))
    results = [
        _paired_run(m_plus, m_minus, g, forcing, t_end, opts) for g in grids
    ]
    hs = [r["h"] for r in results]
    report = {
        "grids": [[g.nr, g.nt] for g in grids],
        "h": hs,
        "dn_differences": [r["dn_diff"] for r in results],
        "dn_order": fitted_order(hs, [r["dn_diff"] for r in results]),
    }
    if control_kappa is not None:
        cg = control_grids if control_grids is not None else grids[:2]
        c_plus = slow_medium_metric(rotational_flow(control_kappa, n_index, sign=+1.0))
        c_minus = slow_medium_metric(rotational_flow(control_kappa, n_index, sign=-1.0))
        ctrl = [_paired_run(c_plus, c_minus, g, forcing, t_end, opts) for g in cg]
        diffs = [r["dn_diff"] for r in ctrl]
        report["control_grids"] = [[g.nr, g.nt] for g in cg]
        report["control_differences"] = diffs
        report["control_max_change"] = float(max(
            abs(b2 / b1 - 1.0) for b1, b2 in zip(diffs, diffs[1:])
        )) if len(diffs) > 1 else 0.0
    return report
