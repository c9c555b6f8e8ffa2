"""Lorentzian metric families for waves in moving media.

All metrics are handled through their contravariant components
``G = [g^{jk}]`` with index 0 reserved for time, so ``G`` is an
``(n+1) x (n+1)`` symmetric matrix field over n-dimensional space.
Three families are provided:

* optical metric of a moving dielectric (full relativistic form),
  ``g^{jk} = eta^{jk} + (n^2 - 1) v^j v^k`` with the four-velocity ``v``
  built from the flow ``w`` and light speed ``c``;
* its slow-flow limit, ``g^{00} = n^2``, ``g^{0j} = (n^2 - 1) w_j / c``,
  spatial part Minkowski;
* the acoustic metric of a moving fluid, ``g^{00} = 1/(rho c)``,
  ``g^{0j} = v^j/(rho c)``, ``g^{jk} = (-c^2 d_{jk} + v^j v^k)/(rho c)``.

The spatial determinant ``Delta(x) = det [g^{jk}]_{j,k>=1}`` vanishes on
the ergosphere; ``Delta < 0`` marks the ergoregion where the spatial part
of the wave operator loses negative definiteness.

Evaluation is vectorized: a point argument of shape ``(..., n)`` returns
matrices of shape ``(..., n+1, n+1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    EvaluationOutsideDomain,
    InvalidProfile,
    NotAxisymmetric,
    SingularMetric,
)

__all__ = [
    "Domain",
    "FlowSpec",
    "SpacetimeMetric",
    "AxisymmetricForm",
    "HyperbolicityReport",
    "gordon_metric",
    "slow_medium_metric",
    "acoustic_metric",
    "minkowski_metric",
    "vortex_flow",
    "radial_profile_flow",
    "radial_linear_flow",
    "uniform_flow",
    "potential_flow",
    "spatial_det",
    "validate_hyperbolicity",
    "lower_metric",
    "axisym_reduce",
    "polar_components",
]


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Domain:
    """Validity annulus ``r_min <= |x| <= r_max`` (either bound may be open)."""

    r_min: float = 0.0
    r_max: float = math.inf

    def contains(self, x: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
        return (r >= self.r_min) & (r <= self.r_max)

    def check(self, x: np.ndarray) -> None:
        ok = self.contains(x)
        if not np.all(ok):
            bad = np.asarray(x, dtype=float).reshape(-1, 2)[~np.ravel(ok)][0]
            raise EvaluationOutsideDomain(
                f"point {bad.tolist()} outside validity annulus "
                f"[{self.r_min}, {self.r_max}]"
            )

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.r_max)


EVERYWHERE = Domain(0.0, math.inf)


# ---------------------------------------------------------------------------
# Flow specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FlowSpec:
    """A velocity field with medium data.

    Parameters
    ----------
    w : callable
        Flow velocity, ``(..., n) -> (..., n)`` (length/time units).
    n_index : callable
        Refraction index ``>= 1``, ``(..., n) -> (...)``.
    c : float
        Wave/light speed, ``> 0``.
    rho : callable
        Density ``> 0`` (used by the acoustic family).
    dw, dn, drho : callable, optional
        Analytic derivatives: ``dw(x)[..., j, p] = dw_j/dx_p``,
        ``dn(x)[..., p] = dn/dx_p``, likewise ``drho``.  When present the
        derived metrics expose analytic derivatives; otherwise central
        finite differences are used.
    domain : Domain
        Validity region of the flow.
    """

    w: Callable[[np.ndarray], np.ndarray]
    n_index: Callable[[np.ndarray], np.ndarray]
    c: float = 1.0
    rho: Callable[[np.ndarray], np.ndarray] = lambda x: np.ones(np.shape(x)[:-1])
    dw: Callable[[np.ndarray], np.ndarray] | None = None
    dn: Callable[[np.ndarray], np.ndarray] | None = None
    drho: Callable[[np.ndarray], np.ndarray] | None = None
    domain: Domain = EVERYWHERE
    name: str = ""
    # optional plain-float fast paths for single-point evaluation
    w_scalar: Callable[[float, float], tuple[float, float]] | None = None
    rho_scalar: Callable[[float, float], float] | None = None
    n_scalar: Callable[[float, float], float] | None = None

    def __post_init__(self):
        if self.c <= 0:
            raise InvalidProfile(f"wave speed must be positive, got c={self.c}")


def uniform_flow(w: tuple[float, float], n_index: float, c: float = 1.0,
                 rho: float = 1.0) -> FlowSpec:
    """Constant flow with constant medium data."""
    wvec = np.asarray(w, dtype=float)

    def _w(x):
        return np.broadcast_to(wvec, np.shape(x)).copy()

    def _zero_mat(x):
        return np.zeros(np.shape(x) + (2,))

    return FlowSpec(
        w=_w,
        n_index=lambda x: np.full(np.shape(x)[:-1], float(n_index)),
        c=c,
        rho=lambda x: np.full(np.shape(x)[:-1], float(rho)),
        dw=_zero_mat,
        dn=lambda x: np.zeros(np.shape(x)),
        drho=lambda x: np.zeros(np.shape(x)),
        name="uniform",
    )


def vortex_flow(A: float, B: float, rho: float = 1.0, c: float = 1.0,
                r_min: float = 1e-8, r_max: float = math.inf) -> FlowSpec:
    """Constant-circulation vortex ``v = (A/r) rhat + (B/r) thetahat``.

    In Cartesian components ``v = M x / r^2`` with ``M = [[A, -B], [B, A]]``,
    which also gives the analytic Jacobian used for ray tracing.  Defaults
    ``rho = c = 1``.  Singular at the origin, hence ``r_min > 0``.
    """
    if A == 0.0 and B == 0.0:
        raise InvalidProfile("vortex needs (A, B) != (0, 0)")
    M = np.array([[A, -B], [B, A]], dtype=float)

    def _w(x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1, keepdims=True)
        if np.any(r2 <= r_min**2):
            raise EvaluationOutsideDomain("vortex flow evaluated at r ~ 0")
        return np.einsum("jp,...p->...j", M, x) / r2

    def _dw(x):
        x = np.asarray(x, dtype=float)
        r2 = np.sum(x * x, axis=-1)
        mx = np.einsum("jp,...p->...j", M, x)
        term1 = M / r2[..., None, None]
        term2 = 2.0 * mx[..., :, None] * x[..., None, :] / (r2 ** 2)[..., None, None]
        return term1 - term2

    rho_f = float(rho)

    def _w_scalar(x1, x2):
        r2 = x1 * x1 + x2 * x2
        if r2 <= r_min**2:
            raise EvaluationOutsideDomain("vortex flow evaluated at r ~ 0")
        return (A * x1 - B * x2) / r2, (A * x2 + B * x1) / r2

    return FlowSpec(
        w=_w,
        n_index=lambda x: np.ones(np.shape(x)[:-1]),
        c=c,
        rho=lambda x: np.full(np.shape(x)[:-1], float(rho)),
        dw=_dw,
        dn=lambda x: np.zeros(np.shape(x)),
        drho=lambda x: np.zeros(np.shape(x)),
        domain=Domain(r_min, r_max),
        name=f"vortex(A={A}, B={B})",
        w_scalar=_w_scalar,
        rho_scalar=lambda x1, x2: rho_f,
        n_scalar=lambda x1, x2: 1.0,
    )


def radial_profile_flow(A: Callable[[np.ndarray], np.ndarray],
                        B: Callable[[np.ndarray], np.ndarray],
                        r1: float, r0: float,
                        n_samples: int = 1000,
                        pad: float = 0.05) -> FlowSpec:
    """Radius-dependent flow ``v = A(r) rhat + B(r) thetahat`` on ``[r1, r0]``.

    The stored profile is validated by dense sampling against:
    ``B > 0`` on ``[r1, r0]``, ``A^2 + B^2 = 1`` at ``r0``,
    ``A^2 + B^2 > 1`` on ``[r1, r0)`` and ``|A(r1)| > 1``.
    Raises :class:`InvalidProfile` citing the violating radius.
    """
    if not (0 < r1 < r0):
        raise InvalidProfile(f"need 0 < r1 < r0, got r1={r1}, r0={r0}")
    rs = np.linspace(r1, r0, n_samples)
    Av = np.asarray(A(rs), dtype=float)
    Bv = np.asarray(B(rs), dtype=float)
    if np.any(Bv <= 0):
        bad = rs[np.argmax(Bv <= 0)]
        raise InvalidProfile(f"B(r) <= 0 at r={bad:.6g}")
    speed2 = Av**2 + Bv**2
    if abs(speed2[-1] - 1.0) > 1e-9:
        raise InvalidProfile(f"A^2 + B^2 must equal 1 at r0={r0}, got {speed2[-1]:.6g}")
    interior = speed2[:-1] <= 1.0
    if np.any(interior):
        bad = rs[:-1][np.argmax(interior)]
        raise InvalidProfile(f"A^2 + B^2 <= 1 inside the annulus at r={bad:.6g}")
    if abs(Av[0]) <= 1.0:
        raise InvalidProfile(f"|A(r1)| must exceed 1, got {Av[0]:.6g}")

    lo, hi = r1 * (1.0 - pad), r0 * (1.0 + pad)

    def _w(x):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        if np.any((r < lo) | (r > hi)):
            raise EvaluationOutsideDomain("profile flow evaluated outside its annulus")
        a = np.asarray(A(r), dtype=float)
        b = np.asarray(B(r), dtype=float)
        rhat = x / r[..., None]
        that = np.stack([-rhat[..., 1], rhat[..., 0]], axis=-1)
        return a[..., None] * rhat + b[..., None] * that

    def _w_scalar(x1, x2):
        r = math.hypot(x1, x2)
        if r < lo or r > hi:
            raise EvaluationOutsideDomain(
                "profile flow evaluated outside its annulus")
        a = float(A(r))
        b = float(B(r))
        return (a * x1 - b * x2) / r, (a * x2 + b * x1) / r

    return FlowSpec(
        w=_w,
        n_index=lambda x: np.ones(np.shape(x)[:-1]),
        c=1.0,
        rho=lambda x: np.ones(np.shape(x)[:-1]),
        domain=Domain(lo, hi),
        name="radial_profile",
        w_scalar=_w_scalar,
        rho_scalar=lambda x1, x2: 1.0,
        n_scalar=lambda x1, x2: 1.0,
    )


def radial_linear_flow(r0: float, n_index: float, c: float = 1.0) -> FlowSpec:
    """Purely radial flow ``w = (c r / (n r0)) rhat`` (i.e. ``w = k x``).

    Reaches ``|w| = c/n`` exactly at ``r = r0``; valid for ``|w| < c``,
    i.e. ``r < n r0``.
    """
    k = c / (float(n_index) * r0)

    def _w(x):
        return k * np.asarray(x, dtype=float)

    def _dw(x):
        out = np.zeros(np.shape(x) + (2,))
        out[..., 0, 0] = k
        out[..., 1, 1] = k
        return out

    nval = float(n_index)
    return FlowSpec(
        w=_w,
        n_index=lambda x: np.full(np.shape(x)[:-1], nval),
        c=c,
        rho=lambda x: np.ones(np.shape(x)[:-1]),
        dw=_dw,
        dn=lambda x: np.zeros(np.shape(x)),
        drho=lambda x: np.zeros(np.shape(x)),
        domain=Domain(0.0, 0.98 * nval * r0),
        name=f"radial_linear(r0={r0})",
        w_scalar=lambda x1, x2: (k * x1, k * x2),
        rho_scalar=lambda x1, x2: 1.0,
        n_scalar=lambda x1, x2: nval,
    )


def potential_flow(grad_b: Callable[[np.ndarray], np.ndarray],
                   n_index: float, c: float = 1.0, sign: float = 1.0) -> FlowSpec:
    """Flow whose slow-medium time row equals ``sign * grad b``.

    Solves ``(n^2 - 1) w_j / c = sign * (grad b)_j`` for ``w``; requires a
    constant index ``n > 1``.
    """
    n2m1 = float(n_index) ** 2 - 1.0
    if n2m1 <= 0:
        raise InvalidProfile("potential flow needs a constant index n > 1")
    scale = sign * c / n2m1

    def _w(x):
        return scale * np.asarray(grad_b(x), dtype=float)

    return FlowSpec(
        w=_w,
        n_index=lambda x: np.full(np.shape(x)[:-1], float(n_index)),
        c=c,
        name="potential",
    )


# ---------------------------------------------------------------------------
# Spacetime metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpacetimeMetric:
    """Evaluator of the contravariant metric ``[g^{jk}(x)]`` and derivatives.

    ``eval_fn`` maps points of shape ``(..., n)`` to symmetric matrices of
    shape ``(..., n+1, n+1)`` with index 0 = time.  ``deriv_fn(x, p)``
    returns ``d[g^{jk}]/dx_p`` for ``p = 1..n``; when absent, second-order
    central differences with step ``h_fd * (1 + |x|)`` are used.
    """

    n_space: int
    eval_fn: Callable[[np.ndarray], np.ndarray]
    domain: Domain = EVERYWHERE
    deriv_fn: Callable[[np.ndarray, int], np.ndarray] | None = None
    h_fd: float = 1e-5
    name: str = ""
    scalar_fn: Callable[[float, float], np.ndarray] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- evaluation ---------------------------------------------------------

    def eval(self, x: np.ndarray) -> np.ndarray:
        if self.scalar_fn is not None and np.ndim(x) == 1 and len(x) == 2:
            x1, x2 = float(x[0]), float(x[1])
            r = math.hypot(x1, x2)
            if r < self.domain.r_min or r > self.domain.r_max:
                raise EvaluationOutsideDomain(
                    f"point [{x1}, {x2}] outside validity annulus "
                    f"[{self.domain.r_min}, {self.domain.r_max}]"
                )
            return self.scalar_fn(x1, x2)
        x = np.asarray(x, dtype=float)
        self.domain.check(x)
        return self.eval_fn(x)

    def eval_clamped(self, x: np.ndarray) -> np.ndarray:
        """Single-point evaluation with a radial clamp onto the domain.

        Integrator trial steps may overshoot the validity annulus before an
        event pulls them back; clamping keeps those evaluations finite
        without affecting accepted trajectory points.
        """
        x1, x2 = float(x[0]), float(x[1])
        r = math.hypot(x1, x2)
        lo, hi = self.domain.r_min, self.domain.r_max
        if r < lo and lo > 0.0:
            # nudge strictly inside so re-derived radii cannot fall back out
            s = (lo / r) * (1.0 + 1e-12) if r > 0 else 0.0
            x1, x2 = (x1 * s, x2 * s) if r > 0 else (lo * (1.0 + 1e-12), 0.0)
        elif r > hi:
            s = (hi / r) * (1.0 - 1e-12)
            x1, x2 = x1 * s, x2 * s
        if self.scalar_fn is not None:
            return self.scalar_fn(x1, x2)
        return self.eval_fn(np.array([x1, x2]))

    def deriv(self, x: np.ndarray, p: int, h: float | None = None) -> np.ndarray:
        """Derivative of the matrix field along spatial axis ``p`` (1-based)."""
        if not 1 <= p <= self.n_space:
            raise ValueError(f"axis p must be in 1..{self.n_space}")
        if self.deriv_fn is not None and h is None:
            x = np.asarray(x, dtype=float)
            self.domain.check(x)
            return self.deriv_fn(x, p)
        return self.deriv_fd(x, p, h)

    def deriv_fd(self, x: np.ndarray, p: int, h: float | None = None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        step = (self.h_fd if h is None else h) * (
            1.0 + np.linalg.norm(x, axis=-1)
        )
        dx = np.zeros_like(x)
        dx[..., p - 1] = step
        return (self.eval(x + dx) - self.eval(x - dx)) / (2.0 * step)[..., None, None]

    def deriv_stack(self, x: np.ndarray) -> np.ndarray:
        """All spatial derivatives, shape ``(..., n, n+1, n+1)`` indexed by p-1."""
        return np.stack([self.deriv(x, p) for p in range(1, self.n_space + 1)],
                        axis=-3)

    # -- convenience views ----------------------------------------------------

    def spatial(self, x: np.ndarray) -> np.ndarray:
        return self.eval(x)[..., 1:, 1:]

    def time_row(self, x: np.ndarray) -> np.ndarray:
        """``(g^{01}, ..., g^{0n})`` at ``x``."""
        return self.eval(x)[..., 0, 1:]

    def replace(self, **kwargs) -> "SpacetimeMetric":
        data = {
            "n_space": self.n_space,
            "eval_fn": self.eval_fn,
            "domain": self.domain,
            "deriv_fn": self.deriv_fn,
            "h_fd": self.h_fd,
            "name": self.name,
            "scalar_fn": self.scalar_fn,
        }
        data.update(kwargs)
        return SpacetimeMetric(**data)


def _eta(n_space: int) -> np.ndarray:
    e = -np.eye(n_space + 1)
    e[0, 0] = 1.0
    return e


def minkowski_metric(n_space: int = 2) -> SpacetimeMetric:
    """Flat metric ``diag(1, -1, ..., -1)``."""
    e = _eta(n_space)

    def _eval(x):
        return np.broadcast_to(e, np.shape(x)[:-1] + e.shape).copy()

    def _deriv(x, p):
        return np.zeros(np.shape(x)[:-1] + e.shape)

    return SpacetimeMetric(n_space, _eval, EVERYWHERE, _deriv, name="minkowski")


def _four_velocity(flow: FlowSpec, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(gamma, gamma * w / c)``; raises when ``|w| >= c``."""
    w = np.asarray(flow.w(x), dtype=float)
    beta2 = np.sum(w * w, axis=-1) / flow.c**2
    if np.any(beta2 >= 1.0):
        raise EvaluationOutsideDomain(
            "flow speed reaches the wave speed: four-velocity undefined"
        )
    gamma = 1.0 / np.sqrt(1.0 - beta2)
    return gamma, gamma[..., None] * w / flow.c


def gordon_metric(flow: FlowSpec) -> SpacetimeMetric:
    """Optical metric ``g^{jk} = eta^{jk} + (n^2-1) v^j v^k`` of a moving medium.

    ``v`` is the four-velocity of the flow; requires ``|w| < c`` pointwise.
    Analytic derivatives are available when the flow carries ``dw`` and
    ``dn`` callbacks.
    """
    n_space = 2
    e = _eta(n_space)

    def _eval(x):
        x = np.asarray(x, dtype=float)
        gamma, vsp = _four_velocity(flow, x)
        n2m1 = np.asarray(flow.n_index(x), dtype=float) ** 2 - 1.0
        V = np.concatenate([gamma[..., None], vsp], axis=-1)
        g = np.broadcast_to(e, x.shape[:-1] + e.shape).copy()
        g += n2m1[..., None, None] * V[..., :, None] * V[..., None, :]
        return g

    deriv_fn = None
    if flow.dw is not None and flow.dn is not None:
        def deriv_fn(x, p):
            x = np.asarray(x, dtype=float)
            w = np.asarray(flow.w(x), dtype=float)
            gamma, vsp = _four_velocity(flow, x)
            nval = np.asarray(flow.n_index(x), dtype=float)
            n2m1 = nval**2 - 1.0
            V = np.concatenate([gamma[..., None], vsp], axis=-1)
            dwp = np.asarray(flow.dw(x), dtype=float)[..., :, p - 1]
            dgamma = gamma**3 * np.sum(w * dwp, axis=-1) / flow.c**2
            dvsp = (dgamma[..., None] * w + gamma[..., None] * dwp) / flow.c
            dV = np.concatenate([dgamma[..., None], dvsp], axis=-1)
            dn_p = np.asarray(flow.dn(x), dtype=float)[..., p - 1]
            VV = V[..., :, None] * V[..., None, :]
            dVV = (dV[..., :, None] * V[..., None, :]
                   + V[..., :, None] * dV[..., None, :])
            return (2.0 * nval * dn_p)[..., None, None] * VV \
                + n2m1[..., None, None] * dVV

    scalar_fn = None
    if flow.w_scalar is not None and flow.n_scalar is not None:
        c2 = flow.c * flow.c

        def scalar_fn(x1, x2):
            w1, w2 = flow.w_scalar(x1, x2)
            beta2 = (w1 * w1 + w2 * w2) / c2
            if beta2 >= 1.0:
                raise EvaluationOutsideDomain(
                    "flow speed reaches the wave speed: four-velocity undefined"
                )
            gamma = 1.0 / math.sqrt(1.0 - beta2)
            nval = flow.n_scalar(x1, x2)
            k = nval * nval - 1.0
            v0 = gamma
            v1 = gamma * w1 / flow.c
            v2 = gamma * w2 / flow.c
            g = np.empty((3, 3))
            g[0, 0] = 1.0 + k * v0 * v0
            g[0, 1] = g[1, 0] = k * v0 * v1
            g[0, 2] = g[2, 0] = k * v0 * v2
            g[1, 1] = -1.0 + k * v1 * v1
            g[1, 2] = g[2, 1] = k * v1 * v2
            g[2, 2] = -1.0 + k * v2 * v2
            return g

    return SpacetimeMetric(n_space, _eval, flow.domain, deriv_fn,
                           name=f"gordon[{flow.name}]", scalar_fn=scalar_fn)


def slow_medium_metric(flow: FlowSpec) -> SpacetimeMetric:
    """Slow-flow optical metric: ``g^{00} = n^2``, ``g^{0j} = (n^2-1) w_j/c``.

    The spatial block stays Minkowski, so the spatial determinant is 1 and
    this family has no ergoregion.
    """
    n_space = 2

    def _eval(x):
        x = np.asarray(x, dtype=float)
        n2 = np.asarray(flow.n_index(x), dtype=float) ** 2
        w = np.asarray(flow.w(x), dtype=float)
        g = np.zeros(x.shape[:-1] + (n_space + 1, n_space + 1))
        g[..., 0, 0] = n2
        row = (n2 - 1.0)[..., None] * w / flow.c
        g[..., 0, 1:] = row
        g[..., 1:, 0] = row
        g[..., 1, 1] = -1.0
        g[..., 2, 2] = -1.0
        return g

    deriv_fn = None
    if flow.dw is not None and flow.dn is not None:
        def deriv_fn(x, p):
            x = np.asarray(x, dtype=float)
            nval = np.asarray(flow.n_index(x), dtype=float)
            w = np.asarray(flow.w(x), dtype=float)
            dwp = np.asarray(flow.dw(x), dtype=float)[..., :, p - 1]
            dn_p = np.asarray(flow.dn(x), dtype=float)[..., p - 1]
            d = np.zeros(x.shape[:-1] + (n_space + 1, n_space + 1))
            d[..., 0, 0] = 2.0 * nval * dn_p
            row = (2.0 * nval * dn_p)[..., None] * w / flow.c \
                + (nval**2 - 1.0)[..., None] * dwp / flow.c
            d[..., 0, 1:] = row
            d[..., 1:, 0] = row
            return d

    scalar_fn = None
    if flow.w_scalar is not None and flow.n_scalar is not None:
        def scalar_fn(x1, x2):
            w1, w2 = flow.w_scalar(x1, x2)
            nval = flow.n_scalar(x1, x2)
            k = (nval * nval - 1.0) / flow.c
            g = np.zeros((3, 3))
            g[0, 0] = nval * nval
            g[0, 1] = g[1, 0] = k * w1
            g[0, 2] = g[2, 0] = k * w2
            g[1, 1] = -1.0
            g[2, 2] = -1.0
            return g

    return SpacetimeMetric(n_space, _eval, flow.domain, deriv_fn,
                           name=f"slow_medium[{flow.name}]", scalar_fn=scalar_fn)


def acoustic_metric(flow: FlowSpec) -> SpacetimeMetric:
    """Acoustic metric of a fluid flow ``v`` with sound speed ``c``, density ``rho``.

    ``g^{00} = 1/(rho c)``, ``g^{0j} = v^j/(rho c)``,
    ``g^{jk} = (-c^2 d_{jk} + v^j v^k)/(rho c)``.  The flow itself plays the
    role of ``v`` (no relativistic correction).
    """
    n_space = 2
    c = flow.c

    def _eval(x):
        x = np.asarray(x, dtype=float)
        v = np.asarray(flow.w(x), dtype=float)
        q = 1.0 / (np.asarray(flow.rho(x), dtype=float) * c)
        g = np.zeros(x.shape[:-1] + (n_space + 1, n_space + 1))
        g[..., 0, 0] = q
        g[..., 0, 1:] = q[..., None] * v
        g[..., 1:, 0] = g[..., 0, 1:]
        sp = v[..., :, None] * v[..., None, :] - c**2 * np.eye(n_space)
        g[..., 1:, 1:] = q[..., None, None] * sp
        return g

    deriv_fn = None
    if flow.dw is not None and flow.drho is not None:
        def deriv_fn(x, p):
            x = np.asarray(x, dtype=float)
            v = np.asarray(flow.w(x), dtype=float)
            rho = np.asarray(flow.rho(x), dtype=float)
            q = 1.0 / (rho * c)
            dq = -np.asarray(flow.drho(x), dtype=float)[..., p - 1] / (rho**2 * c)
            dvp = np.asarray(flow.dw(x), dtype=float)[..., :, p - 1]
            d = np.zeros(x.shape[:-1] + (n_space + 1, n_space + 1))
            d[..., 0, 0] = dq
            row = dq[..., None] * v + q[..., None] * dvp
            d[..., 0, 1:] = row
            d[..., 1:, 0] = row
            sp = v[..., :, None] * v[..., None, :] - c**2 * np.eye(n_space)
            dsp = (dvp[..., :, None] * v[..., None, :]
                   + v[..., :, None] * dvp[..., None, :])
            d[..., 1:, 1:] = dq[..., None, None] * sp + q[..., None, None] * dsp
            return d

    scalar_fn = None
    if flow.w_scalar is not None and flow.rho_scalar is not None:
        c2 = c * c

        def scalar_fn(x1, x2):
            v1, v2 = flow.w_scalar(x1, x2)
            q = 1.0 / (flow.rho_scalar(x1, x2) * c)
            g = np.empty((3, 3))
            g[0, 0] = q
            g[0, 1] = g[1, 0] = q * v1
            g[0, 2] = g[2, 0] = q * v2
            g[1, 1] = q * (v1 * v1 - c2)
            g[1, 2] = g[2, 1] = q * v1 * v2
            g[2, 2] = q * (v2 * v2 - c2)
            return g

    return SpacetimeMetric(n_space, _eval, flow.domain, deriv_fn,
                           name=f"acoustic[{flow.name}]", scalar_fn=scalar_fn)


# ---------------------------------------------------------------------------
# Pointwise diagnostics
# ---------------------------------------------------------------------------

def spatial_det(metric: SpacetimeMetric, x: np.ndarray) -> np.ndarray | float:
    """Determinant ``Delta(x)`` of the spatial block; zero on the ergosphere."""
    sp = metric.spatial(x)
    if metric.n_space == 2:
        out = sp[..., 0, 0] * sp[..., 1, 1] - sp[..., 0, 1] ** 2
    else:
        out = np.linalg.det(sp)
    return float(out) if np.ndim(out) == 0 else out


def lower_metric(metric: SpacetimeMetric, x: np.ndarray) -> np.ndarray:
    """Covariant components ``[g_{jk}] = [g^{jk}]^{-1}`` at ``x``."""
    g = metric.eval(x)
    try:
        inv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise SingularMetric(f"metric not invertible at {np.asarray(x).tolist()}") from exc
    if not np.all(np.isfinite(inv)):
        raise SingularMetric(f"metric inverse not finite at {np.asarray(x).tolist()}")
    return inv


@dataclass(frozen=True)
class HyperbolicityReport:
    """Pointwise flags for the standing assumptions on the metric."""

    g00_positive: bool
    spatial_negative_definite: bool
    time_axis_timelike: bool  # g_00 > 0 in the lowered metric
    flags_consistent: bool
    spatial_det: float


def validate_hyperbolicity(metric: SpacetimeMetric, x: np.ndarray) -> HyperbolicityReport:
    """Check ``g^{00} > 0``, negative definiteness of the spatial block,
    and ``g_00 > 0``; the last two are equivalent and reported together."""
    g = metric.eval(x)
    lowered = lower_metric(metric, x)
    sp = g[..., 1:, 1:]
    eigs = np.linalg.eigvalsh(sp)
    negdef = bool(np.max(eigs) < 0.0)
    timelike = bool(lowered[..., 0, 0] > 0.0)
    return HyperbolicityReport(
        g00_positive=bool(g[..., 0, 0] > 0.0),
        spatial_negative_definite=negdef,
        time_axis_timelike=timelike,
        flags_consistent=(negdef == timelike),
        spatial_det=float(spatial_det(metric, x)),
    )


# ---------------------------------------------------------------------------
# Coordinate transforms
# ---------------------------------------------------------------------------

def polar_components(metric: SpacetimeMetric, r: np.ndarray, theta: np.ndarray) -> dict:
    """Contravariant components in ``(t, r, theta)`` coordinates.

    Returns arrays ``g00, g0r, g0t, grr, grt, gtt`` plus the volume weight
    ``w = r * det([g^{jk}])^{-1/2}`` entering the divergence form of the wave
    operator.  Only for 2-D metrics.
    """
    if metric.n_space != 2:
        raise ValueError("polar components are defined for 2-D metrics")
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    ct, st = np.cos(theta), np.sin(theta)
    x = np.stack([r * ct, r * st], axis=-1)
    g = metric.eval(x)
    det = np.linalg.det(g)
    if np.any(det <= 0):
        raise SingularMetric("det[g^{jk}] <= 0: not a Lorentzian metric here")
    # gradients of the chart: dr = (ct, st), dtheta = (-st, ct)/r
    a1, a2 = ct, st
    b1, b2 = -st / r, ct / r
    g01, g02 = g[..., 0, 1], g[..., 0, 2]
    g11, g12, g22 = g[..., 1, 1], g[..., 1, 2], g[..., 2, 2]
    return {
        "g00": g[..., 0, 0],
        "g0r": g01 * a1 + g02 * a2,
        "g0t": g01 * b1 + g02 * b2,
        "grr": g11 * a1 * a1 + 2 * g12 * a1 * a2 + g22 * a2 * a2,
        "grt": g11 * a1 * b1 + g12 * (a1 * b2 + a2 * b1) + g22 * a2 * b2,
        "gtt": g11 * b1 * b1 + 2 * g12 * b1 * b2 + g22 * b2 * b2,
        "weight": r / np.sqrt(det),
    }


@dataclass(frozen=True, eq=False)
class AxisymmetricForm:
    """2-D quadratic form ``a^{jk}(r, theta)`` for azimuth-independent surfaces.

    ``form(r, theta)`` returns the symmetric 2x2 matrix acting on
    ``(dS/dr, dS/dtheta)``; ``time_row`` gives the companion
    ``(g^{00}, g^{0r}, g^{0theta})`` components so downstream consumers can
    treat ``(r, theta)`` as a 2-D spatial chart.
    """

    form: Callable[[float, float], np.ndarray]
    time_row: Callable[[float, float], np.ndarray]

    def as_metric(self, domain: Domain = EVERYWHERE) -> SpacetimeMetric:
        """Wrap the reduced form as a 2-D metric over the ``(r, theta)`` plane."""
        def _eval(x):
            x = np.atleast_2d(np.asarray(x, dtype=float))
            out = np.empty(x.shape[:-1] + (3, 3))
            for idx in np.ndindex(x.shape[:-1]):
                rr, tt = x[idx]
                a = self.form(rr, tt)
                row = self.time_row(rr, tt)
                m = np.empty((3, 3))
                m[0, 0] = row[0]
                m[0, 1:] = row[1:]
                m[1:, 0] = row[1:]
                m[1:, 1:] = a
                out[idx] = m
            return out if np.asarray(x).ndim > 1 else out[0]

        return SpacetimeMetric(2, _eval, domain, name="axisym_reduced")


def axisym_reduce(metric: SpacetimeMetric, tol: float = 1e-10,
                  n_phi_samples: int = 8,
                  sample_points: np.ndarray | None = None) -> AxisymmetricForm:
    """Reduce a 3-D azimuth-independent metric to a 2-D quadratic form.

    With spherical coordinates ``(r, theta, phi)`` and a surface ``S``
    depending on ``(r, theta)`` only, the characteristic condition becomes
    ``a^{11} S_r^2 + 2 a^{12} S_r S_theta + a^{22} S_theta^2 = 0`` where
    ``a`` is the spatial block contracted with the chart gradients of
    ``r`` and ``theta``.  Azimuthal independence is verified by sampling;
    violations beyond ``tol`` raise :class:`NotAxisymmetric`.
    """
    if metric.n_space != 3:
        raise ValueError("axisymmetric reduction applies to 3-D metrics")

    def _cart(rr, tt, pp):
        stt, ctt = math.sin(tt), math.cos(tt)
        return np.array([rr * stt * math.cos(pp), rr * stt * math.sin(pp),
                         rr * ctt])

    def _grads(rr, tt, pp):
        stt, ctt = math.sin(tt), math.cos(tt)
        spp, cpp = math.sin(pp), math.cos(pp)
        grad_r = np.array([stt * cpp, stt * spp, ctt])
        grad_t = np.array([ctt * cpp, ctt * spp, -stt]) / rr
        return grad_r, grad_t

    def _components(rr, tt, pp):
        g = metric.eval(_cart(rr, tt, pp))
        grad_r, grad_t = _grads(rr, tt, pp)
        sp = g[1:, 1:]
        a = np.empty((2, 2))
        a[0, 0] = grad_r @ sp @ grad_r
        a[0, 1] = a[1, 0] = grad_r @ sp @ grad_t
        a[1, 1] = grad_t @ sp @ grad_t
        row = np.array([g[0, 0], g[0, 1:] @ grad_r, g[0, 1:] @ grad_t])
        return a, row

    if sample_points is None:
        sample_points = np.array([[1.0, 1.0], [1.5, 0.7], [2.0, 2.0], [0.8, 2.4]])
    phis = np.linspace(0.0, 2.0 * math.pi, n_phi_samples, endpoint=False)
    for rr, tt in np.atleast_2d(sample_points):
        ref_a, ref_row = _components(rr, tt, phis[0])
        for pp in phis[1:]:
            a, row = _components(rr, tt, pp)
            dev = max(np.max(np.abs(a - ref_a)), np.max(np.abs(row - ref_row)))
            if dev > tol:
                raise NotAxisymmetric(
                    f"azimuthal dependence {dev:.3e} > {tol:.1e} at "
                    f"(r, theta)=({rr}, {tt})"
                )

    return AxisymmetricForm(
        form=lambda rr, tt: _components(rr, tt, 0.0)[0],
        time_row=lambda rr, tt: _components(rr, tt, 0.0)[1],
    )
