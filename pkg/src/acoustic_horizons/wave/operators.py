"""First-order reduction of the wave operator on the annular grid.

The second-order equation in divergence form is split into the field ``u``
and the momentum ``pi = w (g00 u_t + g0r u_r + g0t u_th)`` where ``w`` is
the volume weight of the polar chart.  All metric coefficients are
precomputed on the grid nodes; the right-hand side is evaluated by the
kernels in :mod:`.kernels`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import GridTooCoarse, SingularMetric
from ..metrics import SpacetimeMetric, polar_components
from .grid import AnnularGrid
from .kernels import get_rhs

__all__ = ["FirstOrderOperator", "first_order_reduce", "cfl_dt"]


@dataclass(frozen=True, eq=False)
class FirstOrderOperator:
    """Discrete operator bundle: coefficient arrays and scratch space."""

    grid: AnnularGrid
    w: np.ndarray
    inv_w: np.ndarray
    g00: np.ndarray
    inv_g00: np.ndarray
    g0r: np.ndarray
    g0t: np.ndarray
    grr: np.ndarray
    grt: np.ndarray
    gtt: np.ndarray
    speed_r: np.ndarray       # max |radial characteristic speed| per node
    speed_t: np.ndarray       # max |angular characteristic speed| per node
    _scratch: tuple

    # -- evaluation -----------------------------------------------------------

    def rhs(self, u: np.ndarray, pi: np.ndarray, ko: float,
            src: np.ndarray | None, du: np.ndarray, dpi: np.ndarray) -> None:
        ut, fr, ft = self._scratch
        get_rhs()(u, pi, self.w, self.inv_w, self.inv_g00, self.g0r, self.g0t,
                  self.grr, self.grt, self.gtt, self.grid.dr, self.grid.dtheta,
                  ko, src, du, dpi, ut, fr, ft)

    def time_derivative(self, u: np.ndarray, pi: np.ndarray) -> np.ndarray:
        """Pointwise ``u_t`` recovered from the momentum."""
        u_r = self.d_r(u)
        u_t = self.d_theta(u)
        return (pi * self.inv_w - self.g0r * u_r - self.g0t * u_t) * self.inv_g00

    def momentum_from(self, u: np.ndarray, ut: np.ndarray) -> np.ndarray:
        """Consistent momentum for a field with known time derivative."""
        return self.w * (self.g00 * ut + self.g0r * self.d_r(u)
                         + self.g0t * self.d_theta(u))

    def d_r(self, q: np.ndarray) -> np.ndarray:
        dr = self.grid.dr
        out = np.empty_like(q)
        out[1:-1] = (q[2:] - q[:-2]) / (2.0 * dr)
        out[0] = (-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * dr)
        out[-1] = (3.0 * q[-1] - 4.0 * q[-2] + q[-3]) / (2.0 * dr)
        return out

    def d_theta(self, q: np.ndarray) -> np.ndarray:
        dth = self.grid.dtheta
        return (np.roll(q, -1, axis=1) - np.roll(q, 1, axis=1)) / (2.0 * dth)

    # -- energy ---------------------------------------------------------------

    def energy_density(self, u: np.ndarray, pi: np.ndarray) -> np.ndarray:
        """Weighted density ``[(g00 u_t + Hu)^2 + (Hu)^2 - g^{ab} u_a u_b] w``.

        ``Hu`` is the time-row contraction ``g0r u_r + g0t u_th``; the first
        square equals ``pi/w`` exactly.  Positive wherever the spatial block
        is negative definite (outside the ergoregion).
        """
        u_r = self.d_r(u)
        u_t = self.d_theta(u)
        hu = self.g0r * u_r + self.g0t * u_t
        quad = (self.grr * u_r**2 + 2.0 * self.grt * u_r * u_t
                + self.gtt * u_t**2)
        return ((pi * self.inv_w) ** 2 + hu**2 - quad) * self.w

    def energy(self, u: np.ndarray, pi: np.ndarray,
               mask: np.ndarray | None = None) -> float:
        rho = self.energy_density(u, pi)
        if mask is not None:
            rho = rho * mask
        return float(np.sum(rho)) * self.grid.cell_area()

    def radial_mask(self, r_lo: float = -np.inf, r_hi: float = np.inf) -> np.ndarray:
        r = self.grid.r
        m = ((r > r_lo) & (r < r_hi)).astype(float)
        return np.repeat(m[:, None], self.grid.nt, axis=1)

    def boundary_power(self, u: np.ndarray, pi: np.ndarray) -> float:
        """Instantaneous conormal-flux power through the outer rim."""
        u_r = self.d_r(u)[-1]
        u_t = self.d_theta(u)[-1]
        rim_ut = ((pi[-1] * self.inv_w[-1] - self.g0r[-1] * u_r
                   - self.g0t[-1] * u_t) * self.inv_g00[-1])
        rim_fr = self.w[-1] * (self.g0r[-1] * rim_ut + self.grr[-1] * u_r
                               + self.grt[-1] * u_t)
        return float(np.sum(rim_ut * rim_fr)) * self.grid.dtheta


def first_order_reduce(metric: SpacetimeMetric, grid: AnnularGrid,
                       min_points_per_wavelength: float | None = None,
                       wavelength: float | None = None) -> FirstOrderOperator:
    """Precompute the divergence-form coefficient arrays on the grid.

    Raises :class:`SingularMetric` if the metric degenerates on any node.
    When a characteristic wavelength estimate is supplied, a
    :class:`GridTooCoarse` warning is issued below 8 points per wavelength.
    """
    rm, tm = grid.mesh()
    comp = polar_components(metric, rm, tm)
    g00 = comp["g00"]
    if np.any(g00 <= 0):
        raise SingularMetric("g^{00} <= 0 on a grid node")
    w = comp["weight"]
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise SingularMetric("volume weight not finite/positive on the grid")

    # directional characteristic speeds from the dispersion relation:
    # g00 s^2 + 2 g0k s + gkk = 0 for each coordinate direction k
    def max_speed(g0k, gkk):
        disc = np.sqrt(np.maximum(g0k**2 - g00 * gkk, 0.0))
        return (np.abs(g0k) + disc) / g00

    speed_r = max_speed(comp["g0r"], comp["grr"])
    speed_t = max_speed(comp["g0t"], comp["gtt"])

    if min_points_per_wavelength is None:
        min_points_per_wavelength = 8.0
    if wavelength is not None:
        h = max(grid.dr, grid.r_min * grid.dtheta)
        if wavelength / h < min_points_per_wavelength:
            warnings.warn(
                f"grid resolves only {wavelength / h:.1f} points per "
                f"characteristic wavelength (advisory minimum "
                f"{min_points_per_wavelength})",
                GridTooCoarse,
            )

    shape = (grid.nr, grid.nt)
    scratch = (np.empty(shape), np.empty(shape), np.empty(shape))
    return FirstOrderOperator(
        grid=grid,
        w=w,
        inv_w=1.0 / w,
        g00=g00,
        inv_g00=1.0 / g00,
        g0r=comp["g0r"],
        g0t=comp["g0t"],
        grr=comp["grr"],
        grt=comp["grt"],
        gtt=comp["gtt"],
        speed_r=speed_r,
        speed_t=speed_t,
        _scratch=scratch,
    )


def cfl_dt(op: FirstOrderOperator, safety: float = 0.4) -> float:
    """Stable step ``safety * min(dr/|s_r|, dtheta/|s_t|)`` over the nodes."""
    with np.errstate(divide="ignore"):
        lim_r = np.where(op.speed_r > 0, op.grid.dr / op.speed_r, np.inf)
        lim_t = np.where(op.speed_t > 0, op.grid.dtheta / op.speed_t, np.inf)
    return float(safety) * float(min(np.min(lim_r), np.min(lim_t)))
