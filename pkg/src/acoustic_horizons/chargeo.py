"""Pointwise characteristic geometry of 2-D Lorentzian metrics.

Inside the ergoregion (spatial determinant ``Delta < 0``) the homogeneous
quadratic ``g^{11} xi_1^2 + 2 g^{12} xi_1 xi_2 + g^{22} xi_2^2 = 0`` has two
real covector lines.  Each line is oriented *forward* so that the lifted
null curve with zero time covector moves forward in time, i.e.
``sum_j g^{0j} xi_j > 0``; the corresponding spatial velocity
``V = 2 G_sp xi`` is automatically tangent to the characteristic curve and
Euclidean-orthogonal to its covector.

The two families are told apart by the sign of the planar cross product
``xi x V``, which is nonzero and of opposite sign for the two lines
strictly inside the ergoregion.  Unit direction fields ``f+`` / ``f-`` are
then fixed by requiring both to point *into* the ergosphere on the
degenerate locus; with that convention one family is parallel to its
forward velocity (parameter increases with time) and the other is
antiparallel (parameter decreases with time).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateRank,
    FrameDiscontinuity,
    MalformedCurve,
    MixedSign,
    NoRealCharacteristics,
    NotCharacteristic,
    NotInErgoregion,
    NotOnErgosphere,
    ZeroRoot,
)
from .metrics import SpacetimeMetric, spatial_det
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "NullDirectionPair",
    "FramePair",
    "HoleClass",
    "spatial_null_covectors",
    "ergosphere_null_covector",
    "char_frames",
    "frame_field",
    "characteristic_residual",
    "classify_hole",
    "time_root_at_null",
    "inner_boundary_condition",
    "flow_alignment_condition",
    "curve_normals",
    "curve_is_simple",
]


# ---------------------------------------------------------------------------
# Small dense 2x2 helpers (closed forms; hot path for orbit integration)
# ---------------------------------------------------------------------------

def _eig2_sym(a: float, b: float, c: float):
    """Eigen-decomposition of [[a, b], [b, c]].

    Returns ``lam1 <= lam2`` and orthonormal eigenvectors ``q1, q2`` with
    ``q1 = rot90(q2)`` so that ``(q2, q1)`` is a right-handed pair.
    """
    m = 0.5 * (a + c)
    d = 0.5 * (a - c)
    rad = math.hypot(d, b)
    lam1, lam2 = m - rad, m + rad
    if rad == 0.0:
        q2 = (1.0, 0.0)
    elif d >= 0.0:
        q2 = (rad + d, b)
    else:
        q2 = (b, rad - d)
    norm = math.hypot(q2[0], q2[1])
    q2 = (q2[0] / norm, q2[1] / norm)
    q1 = (-q2[1], q2[0])
    return lam1, lam2, q1, q2


@dataclass(frozen=True)
class _CharData:
    """Forward-oriented characteristic data at one point."""

    delta: float
    xi_p: np.ndarray      # covector of the positively-crossed family
    xi_m: np.ndarray
    u_p: np.ndarray       # unit forward velocity directions
    u_m: np.ndarray
    speed_p: float        # |V| before normalization
    speed_m: float
    rate_p: float         # d(time)/ds = 2 sum g^{0j} xi_j  (positive)
    rate_m: float
    merged: bool


def _char_data(g: np.ndarray, *, merge_tol: float, clamp: bool,
               atol: float) -> _CharData:
    """Characteristic directions from one metric matrix ``g`` (3x3)."""
    a, b, c = g[1, 1], g[1, 2], g[2, 2]
    w1, w2 = g[0, 1], g[0, 2]
    delta = a * c - b * b
    if delta > merge_tol:
        if not clamp:
            raise NoRealCharacteristics(
                f"spatial determinant {delta:.3e} > 0: no real characteristics"
            )
    lam1, lam2, q1, q2 = _eig2_sym(a, b, c)

    if abs(delta) <= merge_tol or (clamp and delta > 0.0):
        # degenerate locus: both covectors collapse onto the kernel line
        bk = q2 if abs(lam2) <= abs(lam1) else q1
        t = w1 * bk[0] + w2 * bk[1]
        if abs(t) < 1e-14 * max(1.0, abs(w1), abs(w2)):
            raise FrameDiscontinuity(
                "time row orthogonal to the degenerate direction"
            )
        if t < 0.0:
            bk = (-bk[0], -bk[1])
        xi = np.array(bk)
        u = np.array([-bk[1], bk[0]])  # rot90 of the forward kernel covector
        rate = 2.0 * abs(t)
        return _CharData(delta, xi, xi, u, -u, 0.0, 0.0, rate, rate, True)

    s1 = math.sqrt(max(-lam1, 0.0))
    s2 = math.sqrt(max(lam2, 0.0))
    fams = []
    for sgn in (1.0, -1.0):
        xi = np.array([s1 * q2[0] + sgn * s2 * q1[0],
                       s1 * q2[1] + sgn * s2 * q1[1]])
        xi /= math.hypot(xi[0], xi[1])
        t = w1 * xi[0] + w2 * xi[1]
        if t < 0.0:
            xi = -xi
            t = -t
        v = 2.0 * np.array([a * xi[0] + b * xi[1], b * xi[0] + c * xi[1]])
        speed = math.hypot(v[0], v[1])
        cross = xi[0] * v[1] - xi[1] * v[0]
        fams.append((cross, xi, v / speed, speed, 2.0 * t))
    fams.sort(key=lambda f: f[0])
    neg, pos = fams
    if not (neg[0] < 0.0 < pos[0]):
        raise FrameDiscontinuity(
            f"family labeling by orientation failed (crosses "
            f"{neg[0]:.3e}, {pos[0]:.3e})"
        )
    return _CharData(delta, pos[1], neg[1], pos[2], neg[2],
                     pos[3], neg[3], pos[4], neg[4], False)


# ---------------------------------------------------------------------------
# Inward orientation of the frame pair
# ---------------------------------------------------------------------------

def _inward_sign(metric: SpacetimeMetric, x: np.ndarray,
                 tol: Tolerances) -> tuple[float, bool]:
    """Global sign making the common frame point into the degenerate locus.

    Probes radially from ``x`` for the nearest sign change of the spatial
    determinant, evaluates the degenerate direction there, and orients its
    rot90 toward the origin side.  The result is cached per metric: the
    direction fields are continuous in the ergoregion, so one probe fixes
    the whole component.  Returns ``(sign, certain)``; ``certain`` is False
    when the degenerate direction is radial and the orientation defaulted.
    """
    cached = metric._cache.get("frame_sign")
    if cached is not None:
        return cached

    x = np.asarray(x, dtype=float)
    r0 = float(np.linalg.norm(x))
    e = x / r0 if r0 > 1e-12 else np.array([1.0, 0.0])

    def delta_at(r):
        g = metric.eval_clamped(r * e)
        return float(g[1, 1] * g[2, 2] - g[1, 2] ** 2)

    crossing = None
    for direction in (1.0, -1.0):
        r_prev, d_prev = r0, delta_at(r0)
        step = max(0.02 * (1.0 + r0), 1e-4)
        r = r0
        for _ in range(200):
            r_next = r + direction * step
            if r_next <= 1e-9 or not metric.domain.contains(r_next * e):
                break
            d = delta_at(r_next)
            if (d > 0.0) != (d_prev > 0.0):
                lo, dlo, hi = r_prev, d_prev, r_next
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    dm = delta_at(mid)
                    if (dm > 0.0) == (dlo > 0.0):
                        lo, dlo = mid, dm
                    else:
                        hi = mid
                crossing = 0.5 * (lo + hi)
                break
            r_prev, d_prev, r = r_next, d, r_next
            step *= 1.3
        if crossing is not None:
            break

    sign, certain = 1.0, False
    if crossing is not None:
        g = metric.eval(crossing * e)
        data = _char_data(g, merge_tol=math.inf, clamp=True, atol=tol.ergo)
        inward = -float(np.dot(data.u_p, e))  # u_p = rot90(forward kernel covector)
        if abs(inward) > 0.05:
            sign, certain = math.copysign(1.0, inward), True
    metric._cache["frame_sign"] = (sign, certain)
    return sign, certain


# ---------------------------------------------------------------------------
# Public pointwise operations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NullDirectionPair:
    """The two real unit spatial covectors annihilated by the spatial block."""

    xi_plus: np.ndarray
    xi_minus: np.ndarray
    discriminant: float  # (g^{12})^2 - g^{11} g^{22} = -Delta


@dataclass(frozen=True)
class FramePair:
    """Unit tangent direction fields of the two characteristic families."""

    f_plus: np.ndarray
    f_minus: np.ndarray
    merged: bool          # on the degenerate locus the pair collapses
    oriented_inward: bool


@dataclass(frozen=True)
class HoleClass:
    """Black/white classification of a closed characteristic surface."""

    kind: str             # "BlackHole" | "WhiteHole"
    margin: float         # min over samples of |sum_j g^{j0} nu_j|
    residual: float       # characteristic residual of the surface


def spatial_null_covectors(metric: SpacetimeMetric, x: np.ndarray,
                           tol: Tolerances = DEFAULT_TOL) -> NullDirectionPair:
    """Unit covector roots of the spatial characteristic quadratic at ``x``.

    Requires ``Delta(x) <= 0`` (closed ergoregion); outside, the roots are
    complex and :class:`NoRealCharacteristics` is raised.  Labels follow the
    orientation convention of the frame fields.
    """
    g = metric.eval(x)
    data = _char_data(g, merge_tol=tol.ergo, clamp=False, atol=tol.ergo)
    return NullDirectionPair(data.xi_p, data.xi_m, -data.delta)


def ergosphere_null_covector(metric: SpacetimeMetric, y: np.ndarray,
                             tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Unit covector spanning the kernel of the spatial block at ``y``.

    ``y`` must lie on the degenerate locus (``|Delta| < tol.ergo``) and the
    block must have rank exactly ``n - 1``.  The sign is fixed so the
    covector has a positive component along the outward normal of the
    locus; if it is tangent to the locus the orientation falls back to the
    time row.
    """
    y = np.asarray(y, dtype=float)
    g = metric.eval(y)
    a, b, c = g[1, 1], g[1, 2], g[2, 2]
    delta = a * c - b * b
    if abs(delta) >= tol.ergo:
        raise NotOnErgosphere(f"|Delta| = {abs(delta):.3e} >= {tol.ergo:.1e} at {y.tolist()}")
    lam1, lam2, q1, q2 = _eig2_sym(a, b, c)
    small, big = sorted((abs(lam1), abs(lam2)))
    if big < 1e3 * tol.ergo:
        raise DegenerateRank("spatial block has rank < n-1 (both eigenvalues ~ 0)")
    bk = np.array(q2 if abs(lam2) <= abs(lam1) else q1)

    # outward normal of the locus from the gradient of Delta
    h = 1e-6 * (1.0 + np.linalg.norm(y))
    grad = np.array([
        (spatial_det(metric, y + [h, 0]) - spatial_det(metric, y - [h, 0])),
        (spatial_det(metric, y + [0, h]) - spatial_det(metric, y - [0, h])),
    ]) / (2 * h)
    gn = np.linalg.norm(grad)
    proj = float(np.dot(bk, grad) / gn) if gn > 0 else 0.0
    if abs(proj) > 1e-6:
        if proj < 0:
            bk = -bk
    else:
        t = g[0, 1] * bk[0] + g[0, 2] * bk[1]
        if t < 0:
            bk = -bk
    return bk


def char_frames(metric: SpacetimeMetric, x: np.ndarray,
                tol: Tolerances = DEFAULT_TOL) -> FramePair:
    """Unit tangents ``f+``, ``f-`` of the two characteristic families at ``x``.

    Both fields point into the degenerate locus on the locus itself and are
    extended into the ergoregion by continuity; strictly inside they are
    distinct.  ``f+`` is parallel to its forward lifted velocity, ``f-``
    antiparallel.
    """
    x = np.asarray(x, dtype=float)
    g = metric.eval(x)
    data = _char_data(g, merge_tol=tol.ergo, clamp=False, atol=tol.ergo)
    s, certain = _inward_sign(metric, x, tol)
    return FramePair(
        f_plus=s * data.u_p,
        f_minus=-s * data.u_m,
        merged=data.merged,
        oriented_inward=certain,
    )


def frame_field(metric: SpacetimeMetric, family: str,
                orientation: float = 1.0,
                tol: Tolerances = DEFAULT_TOL):
    """Callable unit direction field for planar orbit integration.

    ``family`` is ``"+"`` or ``"-"``; ``orientation = -1`` reverses the
    field (useful for locating repelling cycles).  The returned callable
    clamps gently outside the ergoregion so that event bracketing across
    the boundary stays well-defined.
    """
    if family not in ("+", "-"):
        raise ValueError("family must be '+' or '-'")
    sgn = float(orientation)

    def f(x: np.ndarray) -> np.ndarray:
        g = metric.eval_clamped(x)
        data = _char_data(g, merge_tol=tol.ergo, clamp=True, atol=tol.ergo)
        s, _ = _inward_sign(metric, x, tol)
        vec = data.u_p if family == "+" else -data.u_m
        return sgn * s * vec

    return f


def time_root_at_null(metric: SpacetimeMetric, y: np.ndarray,
                      xi: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> float:
    """Nonzero time root ``-2 (g^{00})^{-1} sum_j g^{0j} xi_j`` at ``y``.

    ``xi`` must satisfy the spatial null condition; the other root of the
    full characteristic quadratic is exactly zero.  A vanishing result
    signals a non-characteristic input surface (:class:`ZeroRoot`).
    """
    y = np.asarray(y, dtype=float)
    xi = np.asarray(xi, dtype=float)
    g = metric.eval(y)
    sp = g[1:, 1:]
    scale = max(np.max(np.abs(sp)), 1e-30) * float(xi @ xi)
    q = float(xi @ sp @ xi)
    if abs(q) > 1e-8 * scale:
        raise NotCharacteristic(
            f"covector is not spatially null: residual {q:.3e}"
        )
    num = float(g[0, 1:] @ xi)
    if abs(num) < 1e-12 * max(1.0, np.max(np.abs(g[0, 1:]))):
        raise ZeroRoot("time row annihilates the covector: degenerate root")
    return -2.0 * num / g[0, 0]


# ---------------------------------------------------------------------------
# Curve-based operations
# ---------------------------------------------------------------------------

def _check_curve(samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2 or samples.shape[0] < 8:
        raise MalformedCurve("need a closed curve of at least 8 planar samples")
    seg = np.linalg.norm(np.diff(samples, axis=0), axis=1)
    gap = np.linalg.norm(samples[0] - samples[-1])
    if gap > 5.0 * np.median(seg):
        raise MalformedCurve(
            f"curve appears open: closing gap {gap:.3e} vs median spacing "
            f"{np.median(seg):.3e}"
        )
    return samples


def curve_normals(samples: np.ndarray) -> np.ndarray:
    """Unit outward normals by central differences with periodic closure."""
    samples = _check_curve(samples)
    tang = np.roll(samples, -1, axis=0) - np.roll(samples, 1, axis=0)
    tang /= np.linalg.norm(tang, axis=1, keepdims=True)
    normals = np.stack([tang[:, 1], -tang[:, 0]], axis=1)
    outward = samples - samples.mean(axis=0)
    flip = np.sum(normals * outward, axis=1) < 0
    normals[flip] *= -1.0
    return normals


def curve_is_simple(samples: np.ndarray, tol: float = 1e-12) -> bool:
    """Numerical Jordan-curve check: no non-adjacent segments intersect."""
    p = _check_curve(samples)
    q = np.roll(p, -1, axis=0)
    n = len(p)
    d = q - p
    for i in range(n - 2):
        js = np.arange(i + 2, n if i > 0 else n - 1)
        r = d[i]
        s = d[js]
        denom = r[0] * s[:, 1] - r[1] * s[:, 0]
        diff = p[js] - p[i]
        t_num = diff[:, 0] * s[:, 1] - diff[:, 1] * s[:, 0]
        u_num = diff[:, 0] * r[1] - diff[:, 1] * r[0]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = t_num / denom
            u = u_num / denom
        hit = (np.abs(denom) > tol) & (t > tol) & (t < 1 - tol) \
            & (u > tol) & (u < 1 - tol)
        if np.any(hit):
            return False
    return True


def characteristic_residual(samples: np.ndarray,
                            metric: SpacetimeMetric) -> float:
    """Max over samples of ``|sum g^{jk} nu_j nu_k|`` with unit outward ``nu``.

    A vanishing residual identifies ``curve x R`` as a characteristic
    surface of the wave operator.
    """
    samples = _check_curve(samples)
    normals = curve_normals(samples)
    sp = metric.eval(samples)[..., 1:, 1:]
    q = np.einsum("ij,ijk,ik->i", normals, sp, normals)
    return float(np.max(np.abs(q)))


def classify_hole(samples: np.ndarray, metric: SpacetimeMetric,
                  tol: Tolerances = DEFAULT_TOL) -> HoleClass:
    """Classify a closed characteristic curve as a black or white hole boundary.

    The sign of ``sum_j g^{j0} nu_j`` (outward ``nu``) must be uniform:
    positive means no outside signal can enter (white hole), negative means
    no inside signal can leave (black hole).
    """
    samples = _check_curve(samples)
    residual = characteristic_residual(samples, metric)
    if residual > tol.char:
        raise NotCharacteristic(
            f"characteristic residual {residual:.3e} > {tol.char:.1e}"
        )
    normals = curve_normals(samples)
    row = metric.eval(samples)[..., 0, 1:]
    flux = np.einsum("ij,ij->i", row, normals)
    if np.all(flux > 0):
        kind = "WhiteHole"
    elif np.all(flux < 0):
        kind = "BlackHole"
    else:
        raise MixedSign(
            "sign of the time-row flux is not uniform along the curve"
        )
    return HoleClass(kind=kind, margin=float(np.min(np.abs(flux))),
                     residual=residual)


def inner_boundary_condition(metric: SpacetimeMetric, samples: np.ndarray,
                             tol: Tolerances = DEFAULT_TOL) -> str:
    """Cone condition on an inner curve: do forward characteristics exit?

    Evaluates the forward-oriented projections of both characteristic
    families against the outward normal ``N`` of the curve: ``"a"`` when
    both cross outward everywhere, ``"b"`` when both cross inward
    everywhere, ``"neither"`` otherwise.
    """
    samples = _check_curve(samples)
    normals = curve_normals(samples)
    dots_p, dots_m = [], []
    for pt, nrm in zip(samples, normals):
        g = metric.eval(pt)
        a, b, c = g[1, 1], g[1, 2], g[2, 2]
        if a * c - b * b >= 0.0:
            raise NotInErgoregion(
                f"curve sample {pt.tolist()} is not strictly inside the ergoregion"
            )
        data = _char_data(g, merge_tol=tol.ergo, clamp=False, atol=tol.ergo)
        dots_p.append(float(data.u_p @ nrm))
        dots_m.append(float(data.u_m @ nrm))
    dp = np.array(dots_p)
    dm = np.array(dots_m)
    if np.all(dp > 0) and np.all(dm > 0):
        return "a"
    if np.all(dp < 0) and np.all(dm < 0):
        return "b"
    return "neither"


def flow_alignment_condition(flow, samples: np.ndarray) -> dict:
    """Threshold test ``sqrt(n^2 - 1) (v . N)`` against +-1 on a curve.

    ``v`` is the spatial four-velocity of the flow and ``N`` the outward
    unit normal.  Values uniformly above 1 (below -1) reproduce the
    trapping hypothesis for the optical metric with an inner curve.
    """
    samples = _check_curve(samples)
    normals = curve_normals(samples)
    w = np.asarray(flow.w(samples), dtype=float)
    beta2 = np.sum(w * w, axis=-1) / flow.c**2
    gamma = 1.0 / np.sqrt(1.0 - beta2)
    v = gamma[:, None] * w / flow.c
    nval = np.asarray(flow.n_index(samples), dtype=float)
    vals = np.sqrt(np.maximum(nval**2 - 1.0, 0.0)) * np.einsum("ij,ij->i", v, normals)
    return {
        "min": float(np.min(vals)),
        "max": float(np.max(vals)),
        "exceeds_plus_one": bool(np.min(vals) > 1.0),
        "below_minus_one": bool(np.max(vals) < -1.0),
    }
