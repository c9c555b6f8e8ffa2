"""Hot kernels of the polar wave solver: numba-jitted with a numpy fallback.

The backend is selected once at import time: set ``ACOUSTIC_HORIZONS_NUMBA=0``
to force the pure-numpy path (the default is the jitted path when numba is
importable).  Both implementations compute the same update:

    ut  = (pi/w - g0r u_r - g0t u_th) / g00
    Fr  = w (g0r ut + grr u_r + grt u_th)
    Fth = w (g0t ut + grt u_r + gtt u_th)
    du  = ut + KO(u)
    dpi = -(d_r Fr + d_th Fth) + w src + KO(pi)

with second-order centered differences (one-sided at the rims for ``u_r``),
periodic azimuth, and fourth-order Kreiss-Oliger dissipation ``KO`` applied
where the five-point stencil fits.  Boundary rows of ``du``/``dpi`` are left
at zero; boundary values are imposed algebraically after each stage.

`benchmarks/kernel_bench.py` compares the two paths.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("ACOUSTIC_HORIZONS_NUMBA", "1") != "0"
try:
    if _FLAG:
        from numba import njit, prange
        NUMBA_AVAILABLE = True
    else:
        NUMBA_AVAILABLE = False
except ImportError:  # pragma: no cover - exercised via the env flag instead
    NUMBA_AVAILABLE = False

USE_NUMBA = _FLAG and NUMBA_AVAILABLE


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy reference implementation
# ---------------------------------------------------------------------------

def _d_theta(q: np.ndarray, dth: float) -> np.ndarray:
    return (np.roll(q, -1, axis=1) - np.roll(q, 1, axis=1)) / (2.0 * dth)


def _d_r_full(q: np.ndarray, dr: float) -> np.ndarray:
    out = np.empty_like(q)
    out[1:-1] = (q[2:] - q[:-2]) / (2.0 * dr)
    out[0] = (-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * dr)
    out[-1] = (3.0 * q[-1] - 4.0 * q[-2] + q[-3]) / (2.0 * dr)
    return out


def _ko_term(q: np.ndarray) -> np.ndarray:
    """Unscaled fourth-difference dissipation stencil, zero where it does not fit."""
    out = np.zeros_like(q)
    out[2:-2] += (q[:-4] - 4.0 * q[1:-3] + 6.0 * q[2:-2]
                  - 4.0 * q[3:-1] + q[4:])
    out[1:-1] += (np.roll(q, 2, axis=1) - 4.0 * np.roll(q, 1, axis=1)
                  + 6.0 * q - 4.0 * np.roll(q, -1, axis=1)
                  + np.roll(q, -2, axis=1))[1:-1]
    return out


def rhs_numpy(u, pi, w, inv_w, inv_g00, g0r, g0t, grr, grt, gtt,
              dr, dth, ko, src, du, dpi, ut, fr, ft):
    """Reference right-hand side; writes ``du``, ``dpi`` (also fills ``ut``)."""
    u_r = _d_r_full(u, dr)
    u_t = _d_theta(u, dth)
    np.multiply(pi, inv_w, out=ut)
    ut -= g0r * u_r
    ut -= g0t * u_t
    ut *= inv_g00
    np.multiply(g0r, ut, out=fr)
    fr += grr * u_r
    fr += grt * u_t
    fr *= w
    np.multiply(g0t, ut, out=ft)
    ft += grt * u_r
    ft += gtt * u_t
    ft *= w
    du[:] = 0.0
    dpi[:] = 0.0
    du[1:-1] = ut[1:-1]
    dpi[1:-1] = -((fr[2:] - fr[:-2]) / (2.0 * dr)
                  + ((np.roll(ft, -1, axis=1) - np.roll(ft, 1, axis=1))
                     / (2.0 * dth))[1:-1])
    if src is not None:
        dpi[1:-1] += (w * src)[1:-1]
    if ko != 0.0:
        du[1:-1] -= ko * _ko_term(u)[1:-1]
        dpi[1:-1] -= ko * _ko_term(pi)[1:-1]


# ---------------------------------------------------------------------------
# numba implementation
# ---------------------------------------------------------------------------

if NUMBA_AVAILABLE:

    @njit(cache=True, parallel=True, fastmath=False)
    def _rhs_jit(u, pi, w, inv_w, inv_g00, g0r, g0t, grr, grt, gtt,
                 dr, dth, ko, src, du, dpi, ut, fr, ft):  # pragma: no cover
        nr, nt = u.shape
        inv2dr = 1.0 / (2.0 * dr)
        inv2dt = 1.0 / (2.0 * dth)
        for i in prange(nr):
            for j in range(nt):
                jm = j - 1 if j > 0 else nt - 1
                jp = j + 1 if j + 1 < nt else 0
                if i == 0:
                    ur = (-3.0 * u[0, j] + 4.0 * u[1, j] - u[2, j]) * inv2dr
                elif i == nr - 1:
                    ur = (3.0 * u[i, j] - 4.0 * u[i - 1, j] + u[i - 2, j]) * inv2dr
                else:
                    ur = (u[i + 1, j] - u[i - 1, j]) * inv2dr
                uth = (u[i, jp] - u[i, jm]) * inv2dt
                utv = (pi[i, j] * inv_w[i, j] - g0r[i, j] * ur
                       - g0t[i, j] * uth) * inv_g00[i, j]
                ut[i, j] = utv
                fr[i, j] = w[i, j] * (g0r[i, j] * utv + grr[i, j] * ur
                                      + grt[i, j] * uth)
                ft[i, j] = w[i, j] * (g0t[i, j] * utv + grt[i, j] * ur
                                      + gtt[i, j] * uth)
        for i in prange(nr):
            if i == 0 or i == nr - 1:
                for j in range(nt):
                    du[i, j] = 0.0
                    dpi[i, j] = 0.0
                continue
            for j in range(nt):
                jm = j - 1 if j > 0 else nt - 1
                jp = j + 1 if j + 1 < nt else 0
                div = (fr[i + 1, j] - fr[i - 1, j]) * inv2dr \
                    + (ft[i, jp] - ft[i, jm]) * inv2dt
                dv = -div + w[i, j] * src[i, j]
                duv = ut[i, j]
                if ko != 0.0:
                    jm2 = j - 2 if j >= 2 else j - 2 + nt
                    jp2 = j + 2 if j + 2 < nt else j + 2 - nt
                    duv -= ko * (u[i, jm2] - 4.0 * u[i, jm] + 6.0 * u[i, j]
                                 - 4.0 * u[i, jp] + u[i, jp2])
                    dv -= ko * (pi[i, jm2] - 4.0 * pi[i, jm] + 6.0 * pi[i, j]
                                - 4.0 * pi[i, jp] + pi[i, jp2])
                    if 2 <= i <= nr - 3:
                        duv -= ko * (u[i - 2, j] - 4.0 * u[i - 1, j]
                                     + 6.0 * u[i, j] - 4.0 * u[i + 1, j]
                                     + u[i + 2, j])
                        dv -= ko * (pi[i - 2, j] - 4.0 * pi[i - 1, j]
                                    + 6.0 * pi[i, j] - 4.0 * pi[i + 1, j]
                                    + pi[i + 2, j])
                du[i, j] = duv
                dpi[i, j] = dv

    _ZERO_SRC_CACHE: dict = {}

    def rhs_numba(u, pi, w, inv_w, inv_g00, g0r, g0t, grr, grt, gtt,
                  dr, dth, ko, src, du, dpi, ut, fr, ft):
        if src is None:
            src = _ZERO_SRC_CACHE.get(u.shape)
            if src is None:
                src = np.zeros_like(u)
                _ZERO_SRC_CACHE[u.shape] = src
        _rhs_jit(u, pi, w, inv_w, inv_g00, g0r, g0t, grr, grt, gtt,
                 float(dr), float(dth), float(ko), src, du, dpi, ut, fr, ft)
else:
    rhs_numba = None


def get_rhs():
    """The backend selected at import time."""
    return rhs_numba if USE_NUMBA else rhs_numpy
