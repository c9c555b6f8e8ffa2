"""Method-of-lines evolution of the reduced wave system on the annulus.

Classical RK4 with fourth-order Kreiss-Oliger dissipation; Dirichlet data
on the outer rim (from the source specification), outflow extrapolation or
Dirichlet on the inner rim.  No condition is imposed on the degenerate
locus: ``g^{00} > 0`` keeps the evolution well-posed straight through the
ergoregion, which is the point of the trapping experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import CFLViolation, NonFiniteField, ZeroEnergy
from .grid import AnnularGrid
from .operators import FirstOrderOperator, cfl_dt, first_order_reduce

__all__ = [
    "BoundaryMultipole",
    "GaussianPulse",
    "WaveOptions",
    "WaveState",
    "WaveSolver",
    "run_scenario",
    "trapping_metric",
    "boundary_h1_norm",
]


# ---------------------------------------------------------------------------
# Sources
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryMultipole:
    """Windowed multipole Dirichlet data ``amp * W(t) * cos(m theta)``.

    ``W`` is a C^2 bump ``sin^3(pi t / duration)`` supported on
    ``[0, duration]``, so the forcing is compactly supported in time.
    """

    amplitude: float = 1.0
    m: int = 2
    duration: float = 1.0

    kind = "boundary_dirichlet"

    def window(self, t: float) -> float:
        if 0.0 < t < self.duration:
            return math.sin(math.pi * t / self.duration) ** 3
        return 0.0

    def window_dt(self, t: float) -> float:
        if 0.0 < t < self.duration:
            a = math.pi / self.duration
            return 3.0 * a * math.sin(a * t) ** 2 * math.cos(a * t)
        return 0.0

    def g(self, t: float, theta: np.ndarray) -> np.ndarray:
        return self.amplitude * self.window(t) * np.cos(self.m * theta)

    def g_t(self, t: float, theta: np.ndarray) -> np.ndarray:
        return self.amplitude * self.window_dt(t) * np.cos(self.m * theta)


@dataclass(frozen=True)
class GaussianPulse:
    """Interior initial data: a Gaussian bump in the Cartesian plane.

    ``phi0 = amp exp(-|x - x_c|^2 / (2 width^2))`` with zero initial time
    derivative; the spatial partials used to seed the momentum are
    analytic.
    """

    center_r: float
    center_theta: float = 0.0
    width: float = 0.1
    amplitude: float = 1.0

    kind = "interior_pulse"

    def _sq_dist(self, r, theta):
        return (r**2 + self.center_r**2
                - 2.0 * r * self.center_r * np.cos(theta - self.center_theta))

    def phi0(self, r, theta):
        return self.amplitude * np.exp(-self._sq_dist(r, theta)
                                       / (2.0 * self.width**2))

    def phi0_r(self, r, theta):
        d = r - self.center_r * np.cos(theta - self.center_theta)
        return -d / self.width**2 * self.phi0(r, theta)

    def phi0_theta(self, r, theta):
        d = r * self.center_r * np.sin(theta - self.center_theta)
        return -d / self.width**2 * self.phi0(r, theta)

    def phi1(self, r, theta):
        return np.zeros_like(np.broadcast_arrays(r, theta)[0])


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------

@dataclass
class WaveState:
    """Evolved field pair with its diagnostic history."""

    u: np.ndarray
    pi: np.ndarray
    t: float
    energy_history: list = field(default_factory=list)
    probe_history: list = field(default_factory=list)
    step_count: int = 0

    def energy_array(self) -> np.ndarray:
        """(t, E_total, E_exterior, E_interior, boundary_flux) rows."""
        return np.asarray(self.energy_history, dtype=float)


@dataclass(frozen=True)
class WaveOptions:
    """Run configuration for the annulus solver."""

    safety: float = 0.4
    ko_eps: float = 0.02
    record_interval: float = 0.02
    inner_bc: str = "extrapolate"   # extrapolate | dirichlet_zero | exact
    outer_bc: str = "source"        # source | exact
    interior_radius: float | None = None
    exterior_radius: float | None = None
    probes: tuple = ()              # (r, theta) pairs
    dt_override: float | None = None
    check_cfl: bool = True


class WaveSolver:
    """Stepping context: operator bundle, boundary data, volume source."""

    def __init__(self, op: FirstOrderOperator, source=None,
                 opts: WaveOptions = WaveOptions(),
                 volume_source: Callable[[float], np.ndarray] | None = None,
                 exact=None):
        self.op = op
        self.source = source
        self.opts = opts
        self.volume_source = volume_source
        self.exact = exact  # object with u/u_t/pi on (t, r_mesh, th_mesh)
        self.grid = op.grid
        self.dt_max = cfl_dt(op, 1.0)
        rm, tm = self.grid.mesh()
        self._rmesh, self._tmesh = rm, tm
        self._theta = self.grid.theta
        self._masks = {
            "total": None,
            "exterior": (op.radial_mask(r_lo=opts.exterior_radius)
                         if opts.exterior_radius is not None else None),
            "interior": (op.radial_mask(r_hi=opts.interior_radius)
                         if opts.interior_radius is not None else None),
        }
        self._probe_idx = [
            (int(round((pr - self.grid.r_min) / self.grid.dr)),
             int(round(pt / self.grid.dtheta)) % self.grid.nt)
            for (pr, pt) in opts.probes
        ]
        shape = (self.grid.nr, self.grid.nt)
        self._k = [np.empty(shape) for _ in range(8)]
        self._stage_u = np.empty(shape)
        self._stage_pi = np.empty(shape)

    # -- state construction ----------------------------------------------------

    def initial_state(self) -> WaveState:
        rm, tm = self._rmesh, self._tmesh
        u = np.zeros_like(rm)
        pi = np.zeros_like(rm)
        if self.source is not None and self.source.kind == "interior_pulse":
            u = self.source.phi0(rm, tm)
            ut = self.source.phi1(rm, tm)
            pi = self.op.w * (self.op.g00 * ut
                              + self.op.g0r * self.source.phi0_r(rm, tm)
                              + self.op.g0t * self.source.phi0_theta(rm, tm))
        elif self.exact is not None:
            u = self.exact.u(0.0, rm, tm)
            pi = self.exact.pi(0.0, rm, tm)
        state = WaveState(u=u, pi=pi, t=0.0)
        self._apply_bc(state.u, state.pi, 0.0)
        self.record(state)
        return state

    # -- boundary conditions ----------------------------------------------------

    def _rim_momentum(self, u: np.ndarray, ut_rim: np.ndarray, row: int) -> np.ndarray:
        dr = self.grid.dr
        if row == -1 or row == self.grid.nr - 1:
            u_r = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dr)
            row = -1
        else:
            u_r = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dr)
            row = 0
        u_t = ((np.roll(u[row], -1) - np.roll(u[row], 1))
               / (2.0 * self.grid.dtheta))
        return self.op.w[row] * (self.op.g00[row] * ut_rim
                                 + self.op.g0r[row] * u_r
                                 + self.op.g0t[row] * u_t)

    def _apply_bc(self, u: np.ndarray, pi: np.ndarray, t: float) -> None:
        # outer rim
        if self.opts.outer_bc == "exact" and self.exact is not None:
            u[-1] = self.exact.u(t, self._rmesh[-1], self._tmesh[-1])
            pi[-1] = self.exact.pi(t, self._rmesh[-1], self._tmesh[-1])
        else:
            if self.source is not None and self.source.kind == "boundary_dirichlet":
                u[-1] = self.source.g(t, self._theta)
                ut_rim = self.source.g_t(t, self._theta)
            else:
                u[-1] = 0.0
                ut_rim = np.zeros(self.grid.nt)
            pi[-1] = self._rim_momentum(u, ut_rim, -1)
        # inner rim
        mode = self.opts.inner_bc
        if mode == "extrapolate":
            # outflow: valid when all characteristics leave through the rim
            u[0] = 2.0 * u[1] - u[2]
            pi[0] = 2.0 * pi[1] - pi[2]
        elif mode == "dirichlet_zero":
            # obstacle wall: u pinned, momentum consistent with u_t = 0
            u[0] = 0.0
            pi[0] = self._rim_momentum(u, np.zeros(self.grid.nt), 0)
        elif mode == "inflow_zero":
            # supersonic inflow (inside a white hole): full quiet state
            u[0] = 0.0
            pi[0] = 0.0
        elif mode == "exact":
            u[0] = self.exact.u(t, self._rmesh[0], self._tmesh[0])
            pi[0] = self.exact.pi(t, self._rmesh[0], self._tmesh[0])
        else:
            raise ValueError(f"unknown inner boundary mode {mode!r}")

    # -- stepping ------------------------------------------------------------------

    def step(self, state: WaveState, dt: float) -> WaveState:
        """Advance one RK4 step of size ``dt`` in place and return the state."""
        if self.opts.check_cfl and dt > self.dt_max * (1.0 + 1e-12):
            raise CFLViolation(
                f"dt = {dt:.3e} exceeds the stability bound {self.dt_max:.3e}"
            )
        op, opts = self.op, self.opts
        ko = opts.ko_eps / (16.0 * dt) if opts.ko_eps else 0.0
        u0, pi0, t = state.u, state.pi, state.t
        ku1, kp1, ku2, kp2, ku3, kp3, ku4, kp4 = self._k
        su, sp = self._stage_u, self._stage_pi

        def src_at(ts):
            return self.volume_source(ts) if self.volume_source is not None else None

        op.rhs(u0, pi0, ko, src_at(t), ku1, kp1)
        np.multiply(ku1, 0.5 * dt, out=su); su += u0
        np.multiply(kp1, 0.5 * dt, out=sp); sp += pi0
        self._apply_bc(su, sp, t + 0.5 * dt)
        op.rhs(su, sp, ko, src_at(t + 0.5 * dt), ku2, kp2)
        np.multiply(ku2, 0.5 * dt, out=su); su += u0
        np.multiply(kp2, 0.5 * dt, out=sp); sp += pi0
        self._apply_bc(su, sp, t + 0.5 * dt)
        op.rhs(su, sp, ko, src_at(t + 0.5 * dt), ku3, kp3)
        np.multiply(ku3, dt, out=su); su += u0
        np.multiply(kp3, dt, out=sp); sp += pi0
        self._apply_bc(su, sp, t + dt)
        op.rhs(su, sp, ko, src_at(t + dt), ku4, kp4)

        u0 += (dt / 6.0) * (ku1 + 2.0 * ku2 + 2.0 * ku3 + ku4)
        pi0 += (dt / 6.0) * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4)
        state.t = t + dt
        self._apply_bc(u0, pi0, state.t)
        state.step_count += 1
        return state

    # -- recording ---------------------------------------------------------------

    def record(self, state: WaveState) -> None:
        if not np.all(np.isfinite(state.u)) or not np.all(np.isfinite(state.pi)):
            raise NonFiniteField(
                f"non-finite field detected at t = {state.t:.6f} "
                f"(step {state.step_count})"
            )
        e_tot = self.op.energy(state.u, state.pi)
        e_ext = (self.op.energy(state.u, state.pi, self._masks["exterior"])
                 if self._masks["exterior"] is not None else 0.0)
        e_int = (self.op.energy(state.u, state.pi, self._masks["interior"])
                 if self._masks["interior"] is not None else 0.0)
        flux = self.op.boundary_power(state.u, state.pi)
        state.energy_history.append((state.t, e_tot, e_ext, e_int, flux))
        if self._probe_idx:
            state.probe_history.append(
                (state.t,) + tuple(float(state.u[i, j])
                                   for i, j in self._probe_idx)
            )

    def run(self, t_end: float, recorders: tuple = ()) -> WaveState:
        """Advance from rest to ``t_end`` recording every ``record_interval``.

        ``recorders`` are callables ``(solver, state) -> None`` invoked at
        every record time (including t = 0).
        """
        state = self.initial_state()
        for rec in recorders:
            rec(self, state)
        if self.opts.dt_override is not None:
            dt = self.opts.dt_override
            n_sub = max(1, int(round(self.opts.record_interval / dt)))
        else:
            dt_stable = cfl_dt(self.op, self.opts.safety)
            n_sub = max(1, int(math.ceil(self.opts.record_interval / dt_stable)))
            dt = self.opts.record_interval / n_sub
        n_rec = int(round(t_end / self.opts.record_interval))
        for _ in range(n_rec):
            for _ in range(n_sub):
                self.step(state, dt)
            self.record(state)
            for rec in recorders:
                rec(self, state)
        return state


def run_scenario(metric, grid: AnnularGrid, source, t_end: float,
                 opts: WaveOptions = WaveOptions(),
                 volume_source=None, exact=None,
                 recorders: tuple = ()) -> tuple[WaveState, WaveSolver]:
    """Build the operator bundle and evolve the scenario to ``t_end``."""
    op = first_order_reduce(metric, grid)
    solver = WaveSolver(op, source, opts, volume_source, exact)
    state = solver.run(t_end, recorders)
    return state, solver


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def trapping_metric(state: WaveState) -> float:
    """Max over recorded times of ``E_exterior(t) / E_total(0)``.

    Small values certify that energy injected inside the horizon does not
    appear outside at this resolution.
    """
    hist = state.energy_array()
    if len(hist) == 0:
        raise ZeroEnergy("no energy records")
    e0 = hist[0, 1]
    if not (e0 > 0.0):
        raise ZeroEnergy("initial total energy vanished")
    return float(np.max(hist[:, 2]) / e0)


def boundary_h1_norm(samples: np.ndarray, times: np.ndarray,
                     r_rim: float) -> float:
    """Squared H^1 norm of rim data over (time x azimuth).

    Azimuthal derivative by spectral differentiation, time derivative by
    second-order finite differences on the record grid.
    """
    samples = np.asarray(samples, dtype=float)
    nt_steps, n_theta = samples.shape
    dth = 2.0 * math.pi / n_theta
    k = np.fft.rfftfreq(n_theta, d=1.0 / n_theta) * 1j
    g_theta = np.fft.irfft(np.fft.rfft(samples, axis=1) * k[None, :],
                           n=n_theta, axis=1)
    g_t = np.gradient(samples, times, axis=0, edge_order=2)
    dt_rec = float(times[1] - times[0]) if len(times) > 1 else 1.0
    dens = samples**2 + g_t**2 + g_theta**2
    return float(np.sum(dens)) * r_rim * dth * dt_rec
