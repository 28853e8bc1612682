"""Heat semigroup of ``L = sum X_i^2`` on step-two Carnot groups.

On the first Heisenberg group the kernel from the origin is

    p((x, y, z), t) = 1/(4 pi^2 t^2) int_0^inf mu/sinh(mu) exp(-(r^2/4t) mu coth mu) cos(mu z/t) dmu

with ``r^2 = x^2 + y^2``.  It is evaluated two ways: a fixed composite
Gauss-Legendre rule (fast, vectorized, smooth in the arguments so finite
differences are clean) and adaptive QAWO quadrature with an explicit tail bound
(slow, the reference).  On other groups the semigroup is sampled by simulating
the diffusion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad

from . import kernels
from .metrics import _is_h1, _map_chunks, distances_from, TauMetric
from .models import CarnotModel, heisenberg

QUAD_TOL = 1e-10
A_UNDERFLOW = 700.0
STEPS_PER_UNIT_TIME = 1000
MIN_STEPS = 256
PATH_CHUNK = 4096

_H1 = heisenberg(1)


class QuadratureError(RuntimeError):
    pass


@dataclass
class Estimate:
    value: float
    stderr: float | None
    samples: int | None = None


# ---------------------------------------------------------------------------
# Heisenberg kernel
# ---------------------------------------------------------------------------


def _tail_bound(a: float, M: float) -> float:
    # for mu >= M: mu/sinh(mu) <= 2 mu e^-mu / (1 - e^-2M) and mu coth mu - 1 >= mu - 1
    c = 1.0 + a
    return 2.0 / (1.0 - math.exp(-2.0 * M)) * math.exp(a - c * M) * (M / c + 1.0 / (c * c))


def kernel_h1(p, t: float, tol: float = QUAD_TOL) -> float:
    """Heat kernel of the first Heisenberg group from the origin, by adaptive quadrature.

    The integral is truncated where the analytic tail bound drops below
    ``tol / 10``; the oscillatory part uses QUADPACK's cosine-weighted rule.
    Raises :class:`QuadratureError` when the error estimate exceeds ``tol``.
    """
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    x, y, z = (float(v) for v in p)
    a = (x * x + y * y) / (4.0 * t)
    w = abs(z) / t
    M = 1.0
    while _tail_bound(a, M) > tol / 10:
        M *= 1.5

    def f(mu):
        if mu < 1e-4:
            return (1.0 - mu * mu / 6.0) * math.exp(-a * mu * mu / 3.0)
        return mu / math.sinh(mu) * math.exp(-a * (mu / math.tanh(mu) - 1.0))

    if w > 0:
        val, err = quad(f, 0.0, M, weight="cos", wvar=w, epsabs=tol / 10, epsrel=0.0, limit=500)
    else:
        val, err = quad(f, 0.0, M, epsabs=tol / 10, epsrel=0.0, limit=500)
    err += _tail_bound(a, M)
    if err > tol:
        raise QuadratureError(f"kernel quadrature error {err:.2e} exceeds {tol:.1e} at {p}, t={t}")
    return math.exp(-a) * val / (4.0 * math.pi**2 * t * t)


@lru_cache(maxsize=256)
def _nodes(log_smax: int, log_h: int):
    return kernels.kernel_nodes(2.0**log_h, 2.0**log_smax)


def _kernel_integral(a: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``int_0^inf g(mu) cos(mu w) dmu`` with the ``exp(-a)`` factor removed."""
    out = np.zeros_like(a)
    c = 1.0 + a
    # smooth scale of the integrand in s = c mu, and its oscillation period
    h = np.minimum(np.maximum(4.0, np.sqrt(a)), 4.0 * c / np.maximum(w, 1e-300))
    log_h = np.floor(np.log2(np.minimum(h, 8.0))).astype(int)
    log_s = np.ceil(np.log2(40.0 + a)).astype(int)
    keys = log_s * 1000 + (log_h + 500)
    for key in np.unique(keys):
        idx = np.flatnonzero(keys == key)
        s_nodes, s_w = _nodes(int(key // 1000), int(key % 1000) - 500)
        out[idx] = kernels.h1_kernel_sum(np.ascontiguousarray(a[idx]), np.ascontiguousarray(w[idx]), s_nodes, s_w)
    return out


def h1_kernel(points, t) -> np.ndarray:
    """Vectorized Heisenberg heat kernel ``p(0, point, t)`` for an ``(N, 3)`` array.

    ``t`` may be a scalar or an array broadcastable to ``N``.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    t = np.broadcast_to(np.asarray(t, dtype=float), (pts.shape[0],))
    if np.any(t <= 0):
        raise ValueError("time must be positive")
    a = (pts[:, 0] ** 2 + pts[:, 1] ** 2) / (4.0 * t)
    w = np.abs(pts[:, 2]) / t
    out = np.zeros(len(pts))
    live = a < A_UNDERFLOW
    if np.any(live):
        I = _kernel_integral(a[live], w[live])
        out[live] = np.exp(-a[live]) * I / (4.0 * math.pi**2 * t[live] ** 2)
    return out


def h1_kernel_rz(r, z, t) -> np.ndarray:
    """Kernel as a function of ``r = |(x, y)|`` and ``z``."""
    r = np.asarray(r, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    return h1_kernel(np.column_stack([r, np.zeros_like(r), z]), t)


@dataclass
class KernelEvaluator:
    """Heat kernel ``p(x, y, t)`` on the first Heisenberg group."""

    model: CarnotModel = _H1
    tol: float = QUAD_TOL

    def __post_init__(self):
        if not _is_h1(self.model):
            raise ValueError("closed-form kernel is available on heisenberg(1) only")

    def __call__(self, x, y, t) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return h1_kernel(self.model.mul(self.model.inv(x), y), t)

    def reference(self, x, y, t: float) -> float:
        rel = self.model.mul(self.model.inv(np.asarray(x, float)), np.asarray(y, float))
        return kernel_h1(rel, t, self.tol)


def _gl(n: int, lo: float, hi: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return lo + 0.5 * (hi - lo) * (x + 1.0), 0.5 * (hi - lo) * w


def _composite_gl(edges, n: int = 16):
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = _gl(n, lo, hi)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def kernel_mass(t: float, n_r: int = 4, n_z: int = 8) -> float:
    """Total mass of the Heisenberg kernel, integrated in cylindrical coordinates.

    The kernel depends only on ``(r, |z|)``, so the three-dimensional integral
    is ``4 pi int_0^inf int_0^inf r p(r, z, t) dz dr``; both ranges are cut
    where the kernel is below ``1e-18`` of its peak.
    """
    r_max = math.sqrt(4.0 * t * 45.0)
    z_max = 15.0 * t
    rn, rw = _composite_gl(np.linspace(0.0, r_max, n_r + 1))
    zn, zw = _composite_gl(np.linspace(0.0, z_max, n_z + 1))
    R, Z = np.meshgrid(rn, zn, indexing="ij")
    vals = h1_kernel_rz(R, Z, t).reshape(R.shape)
    return float(4.0 * math.pi * np.einsum("i,j,i,ij->", rw, zw, rn, vals))


# ---------------------------------------------------------------------------
# diffusion simulation
# ---------------------------------------------------------------------------


@dataclass
class DiffusionSimulator:
    """Endpoints of the diffusion generated by ``L`` started at a point.

    Horizontal increments are ``sqrt(2 dt) N(0, I)``; the vertical update is
    ``z^k += 1/2 <B^k x, dx>`` (the midpoint rule, since ``B^k`` is skew).
    Paths are simulated in fixed chunks, chunk ``i`` drawing from
    ``SeedSequence([seed, i])``, so results do not depend on the worker count.
    """

    model: CarnotModel
    seed: int = 0
    steps_per_unit_time: int = STEPS_PER_UNIT_TIME
    min_steps: int = MIN_STEPS

    def n_steps(self, t: float) -> int:
        return max(self.min_steps, int(math.ceil(self.steps_per_unit_time * t)))

    def endpoints(self, x0, t: float, n_paths: int) -> np.ndarray:
        if not t > 0:
            raise ValueError(f"time must be positive, got {t}")
        if n_paths < 1:
            raise ValueError("need at least one path")
        x0 = np.asarray(x0, dtype=float)
        steps = self.n_steps(t)
        dt = t / steps
        d = self.model.d
        B = self.model.B
        chunks = [(i, s, min(PATH_CHUNK, n_paths - s)) for i, s in enumerate(range(0, n_paths, PATH_CHUNK))]

        def run(chunk):
            i, _, size = chunk
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, i]))
            normals = rng.standard_normal((size, steps, d))
            return kernels.diffusion_endpoints(x0, normals, dt, B)

        return np.vstack(_map_chunks(run, chunks))


def _box_fraction(ends: np.ndarray, center: np.ndarray, half: np.ndarray):
    inside = np.all(np.abs(ends - center) <= half, axis=1)
    return inside.mean(), inside


def mc_density(sim: DiffusionSimulator, x0, t: float, points, half_width, n_paths: int,
               ends: np.ndarray | None = None) -> list[Estimate]:
    """Monte Carlo box averages of the kernel ``p(x0, ., t)`` around each point.

    Returns the fraction of endpoints in the box divided by its volume, with
    binomial standard errors.  Compare with :func:`kernel_box_average`.
    """
    ends = sim.endpoints(x0, t, n_paths) if ends is None else ends
    half = np.broadcast_to(np.asarray(half_width, dtype=float), (sim.model.n,))
    vol = float(np.prod(2 * half))
    out = []
    for p in np.atleast_2d(points):
        f, _ = _box_fraction(ends, np.asarray(p, float), half)
        n = len(ends)
        out.append(Estimate(f / vol, math.sqrt(max(f * (1 - f), 1.0 / n) / n) / vol, n))
    return out


def kernel_box_average(center, half_width, t: float, n: int = 12) -> float:
    """Average of the Heisenberg kernel from the origin over an axis-aligned box."""
    half = np.broadcast_to(np.asarray(half_width, dtype=float), (3,))
    c = np.asarray(center, dtype=float)
    axes = [_gl(n, c[i] - half[i], c[i] + half[i]) for i in range(3)]
    X, Y, Z = np.meshgrid(axes[0][0], axes[1][0], axes[2][0], indexing="ij")
    vals = h1_kernel(np.column_stack([X.ravel(), Y.ravel(), Z.ravel()]), t).reshape(X.shape)
    total = np.einsum("i,j,k,ijk->", axes[0][1], axes[1][1], axes[2][1], vals)
    return float(total / np.prod(2 * half))


# ---------------------------------------------------------------------------
# semigroup
# ---------------------------------------------------------------------------


def _kernel_grid(t: float, n_xy: int, n_z: int):
    # cylindrical grid: the kernel depends on (rho, z) only, so it is evaluated
    # on n_rho x n_z nodes and broadcast over the angle; cut at ~1e-16 of the peak
    R = math.sqrt(4.0 * t * 38.0)
    Zm = 12.0 * t
    n_rho = max(16, n_xy // 2)
    gr, wr = _composite_gl(np.linspace(0.0, R, max(1, n_rho // 16) + 1))
    gz, wz = _composite_gl(np.linspace(-Zm, Zm, max(1, n_z // 16) + 1))
    th = 2.0 * math.pi * np.arange(n_xy) / n_xy
    RR, ZZ = np.meshgrid(gr, gz, indexing="ij")
    kern = h1_kernel_rz(RR.ravel(), ZZ.ravel(), t).reshape(RR.shape)
    w_rz = (wr * gr)[:, None] * wz[None, :] * kern * (2.0 * math.pi / n_xy)
    Rg, Tg, Zg = np.meshgrid(gr, th, gz, indexing="ij")
    pts = np.column_stack([(Rg * np.cos(Tg)).ravel(), (Rg * np.sin(Tg)).ravel(), Zg.ravel()])
    wts = np.broadcast_to(w_rz[:, None, :], Rg.shape).ravel()
    return pts, wts


def semigroup_apply(f: Callable[[np.ndarray], np.ndarray], t: float, x, method: str = "quadrature",
                    model: CarnotModel = _H1, n_paths: int = 100_000, seed: int = 0, bound: float | None = None,
                    n_xy: int = 64, n_z: int = 96) -> Estimate:
    """Estimate ``P_t f(x)``.

    ``f`` maps an ``(N, n)`` array of points to ``N`` values.  The quadrature
    method (first Heisenberg group only) writes ``P_t f(x) = int p(0, u, t) f(x u) du``
    on a tensor Gauss-Legendre grid and reports the change from a coarser grid
    as its error; the Monte Carlo method averages ``f`` over diffusion endpoints.
    ``f`` must be bounded: non-finite values, or values above ``bound`` in
    absolute value, are rejected.
    """
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    x = np.asarray(x, dtype=float)

    def checked(vals):
        vals = np.asarray(vals, dtype=float)
        if not np.all(np.isfinite(vals)) or (bound is not None and np.any(np.abs(vals) > bound)):
            raise ValueError("test function must be bounded")
        return vals

    if method == "quadrature":
        if not _is_h1(model):
            raise ValueError("quadrature semigroup is available on heisenberg(1) only")
        est = []
        for scale in (1.0, 0.75):
            pts, wts = _kernel_grid(t, int(n_xy * scale), int(n_z * scale))
            vals = checked(f(model.mul(x[None, :], pts)))
            est.append(float(wts @ vals))
        return Estimate(est[0], abs(est[0] - est[1]), None)
    if method == "montecarlo":
        ends = DiffusionSimulator(model, seed).endpoints(x, t, n_paths)
        vals = checked(f(ends))
        return Estimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals))), n_paths)
    raise ValueError(f"unknown method {method!r}")


def heat_content(model: CarnotModel, x, r: float, t: float, n_paths: int = 100_000, seed: int = 0,
                 sim: DiffusionSimulator | None = None, max_failure_rate: float = 0.01) -> Estimate:
    """Monte Carlo estimate of ``P_t(1_{B(x, r)})(x)`` for the sub-Riemannian ball."""
    if not (r > 0 and t > 0):
        raise ValueError("need r > 0 and t > 0")
    sim = sim or DiffusionSimulator(model, seed)
    x = np.asarray(x, dtype=float)
    ends = sim.endpoints(x, t, n_paths)
    dist, ok = distances_from(TauMetric(model, 0.0), x, ends)
    if (~ok).sum() > max_failure_rate * n_paths:
        raise RuntimeError(f"distance solver failed on {(~ok).sum()} of {n_paths} endpoints")
    inside = (dist < r) & ok
    f = inside.mean()
    return Estimate(float(f), float(math.sqrt(f * (1 - f) / n_paths)), n_paths)


# ---------------------------------------------------------------------------
# derivatives of log P_t f for the Li-Yau family
# ---------------------------------------------------------------------------


@dataclass
class LogDerivatives:
    """Terms of the Li-Yau inequality at one point and time."""

    P: float
    gamma: float
    gamma_Z: float
    LP: float
    dt_log: float

    @property
    def LP_over_P(self) -> float:
        return self.LP / self.P


def shifted_kernel_value(x, t: float, y0=(0.0, 0.0, 0.0), eps: float = 0.05) -> np.ndarray:
    """``P_t f(x)`` for ``f = p(., y0, eps)``, which is ``p(x, y0, t + eps)``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return h1_kernel(_H1.mul(_H1.inv(np.asarray(y0, float))[None, :], x), t + eps)


def log_derivatives(t: float, x, h: float = 1e-4, y0=(0.0, 0.0, 0.0), eps: float = 0.05,
                    value: Callable | None = None) -> LogDerivatives:
    """Frame-aligned central differences of ``P_t f`` at ``x`` on the first Heisenberg group.

    ``X u(x)`` is the derivative of ``s -> u(x exp(s X))``, so every stencil
    point is a right translate of ``x`` along a one-parameter subgroup.  By
    default ``f`` is the kernel at time ``eps`` centred at ``y0``; ``value(points, t)``
    overrides the evaluator.
    """
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    value = value or (lambda pts, tt: shifted_kernel_value(pts, tt, y0, eps))
    x = np.asarray(x, dtype=float)
    steps = np.array([[h, 0, 0], [-h, 0, 0], [0, h, 0], [0, -h, 0], [0, 0, h], [0, 0, -h]])
    pts = np.vstack([x, _H1.mul(x[None, :], steps)])
    v = np.asarray(value(pts, t), dtype=float)
    p0 = v[0]
    if not p0 > 0 or np.any(v <= 0):
        raise ValueError("P_t f must be positive on the stencil")
    if p0 < 1e-200:
        raise FloatingPointError("stencil underflow")
    xp, xm, yp, ym, zp, zm = v[1:]
    dX = (xp - xm) / (2 * h)
    dY = (yp - ym) / (2 * h)
    dZ = (zp - zm) / (2 * h)
    LP = (xp - 2 * p0 + xm) / (h * h) + (yp - 2 * p0 + ym) / (h * h)
    ht = h * max(t, 1.0)
    ht = min(ht, 0.5 * t)
    vt = np.asarray(value(np.vstack([x, x]), np.array([t + ht, t - ht])), dtype=float)
    dt_log = (math.log(vt[0]) - math.log(vt[1])) / (2 * ht)
    return LogDerivatives(float(p0), float((dX * dX + dY * dY) / p0**2), float(dZ * dZ / p0**2), float(LP),
                          float(dt_log))


# ---------------------------------------------------------------------------
# ball and complement masses
# ---------------------------------------------------------------------------


def _polar_jacobian(ell, phi):
    """Point coordinates and area element of ``(ell, phi) -> (r, z)``.

    The sub-Riemannian geodesic of length ``ell`` and half turning angle ``phi``
    ends at ``r = ell sin(phi)/phi``, ``z = ell^2 g(phi)`` with
    ``g(phi) = (2 phi - sin 2 phi)/(8 phi^2)``; for ``phi`` in ``(0, pi)`` these
    are the points at distance ``ell`` from the origin with ``z > 0``.
    """
    s, c = np.sin(phi), np.cos(phi)
    g = (2 * phi - np.sin(2 * phi)) / (8 * phi * phi)
    dg = (2 - 2 * np.cos(2 * phi)) / (8 * phi * phi) - 2 * g / phi
    r = ell * s / phi
    z = ell * ell * g
    r_ell = s / phi
    r_phi = ell * (phi * c - s) / (phi * phi)
    jac = np.abs(r_ell * ell * ell * dg - r_phi * 2 * ell * g)
    return r, z, jac


def complement_mass(r: float, t: float, n_ell: int = 8, n_phi: int = 8) -> float:
    """``P_t(1_{B(0, r)^c})(0)`` on the first Heisenberg group.

    Integrated in geodesic polar coordinates ``(ell, phi)`` so that the ball
    boundary is the coordinate line ``ell = r``.  In ``v = ell^2 - r^2`` the
    integrand decays like ``exp(-v / 4t)``, which sets the panels.
    """
    if not (r > 0 and t > 0):
        raise ValueError("need r > 0 and t > 0")
    v_max = 4.0 * t * 45.0
    # geometric panels resolve the boundary layer of width ~ t
    edges = np.concatenate([[0.0], v_max * np.geomspace(1e-4, 1.0, n_ell)])
    vn, vw = _composite_gl(edges)
    ell = np.sqrt(r * r + vn)
    ell_w = vw / (2.0 * ell)
    pn, pw = _composite_gl(np.linspace(0.0, math.pi, n_phi + 1))
    E, PH = np.meshgrid(ell, pn, indexing="ij")
    rr, zz, jac = _polar_jacobian(E, PH)
    vals = h1_kernel_rz(rr, zz, t).reshape(E.shape)
    return float(4.0 * math.pi * np.einsum("i,j,ij->", ell_w, pw, rr * jac * vals))


def ball_mass(r: float, t: float, n_r: int = 8, n_z: int = 8) -> float:
    """``P_t(1_{B(0, r)})(0)`` integrated in ``(r, z)`` with the sphere as the z-limit.

    Independent of :func:`complement_mass`; the two must sum to one.
    """
    # sphere: radius rho(phi) = r sin(phi)/phi and height r^2 g(phi); integrate over phi in z-slices
    pn, pw = _composite_gl(np.linspace(0.0, math.pi, n_r + 1))
    s = np.sin(pn)
    rho = r * s / pn
    drho = r * np.abs(pn * np.cos(pn) - s) / (pn * pn)
    zmax = r * r * (2 * pn - np.sin(2 * pn)) / (8 * pn * pn)
    u, uw = _composite_gl(np.linspace(0.0, 1.0, n_z + 1))
    RHO = np.repeat(rho[:, None], len(u), axis=1)
    Z = zmax[:, None] * u[None, :]
    vals = h1_kernel_rz(RHO, Z, t).reshape(RHO.shape)
    inner = (vals * uw[None, :]).sum(axis=1) * zmax
    return float(4.0 * math.pi * np.sum(pw * drho * rho * inner))


def complement_mass_series(r: float, times) -> np.ndarray:
    return np.array([complement_mass(r, float(t)) for t in times])
