"""Hot numeric loops, each with a numba and a pure-numpy implementation.

The public names (``h1_distance``, ``diffusion_endpoints``, ``h1_kernel_sum``)
dispatch to the numba versions unless ``SUBRK_NUMBA=0``; both variants are
importable under ``*_numba`` / ``*_numpy`` for benchmarking and cross-checks.
"""

import math

import numpy as np

from ._accel import BACKEND, HAVE_NUMBA, njit

TWO_PI = 2.0 * math.pi
N_ITER = 100

# ---------------------------------------------------------------------------
# Heisenberg sub-Riemannian distance from the origin.
#
# A geodesic from 0 to (x, y, z) projects to a circular arc of turning angle
# 2*phi over the chord of length r; z is the area between arc and chord:
#     |z| / r^2 = (2 phi - sin 2 phi) / (8 sin^2 phi),   length = r phi / sin phi.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _area_ratio_nb(phi):
    if phi < 1e-2:
        t = 2.0 * phi
        t2 = t * t
        num = t * t2 * (1.0 / 6.0 - t2 * (1.0 / 120.0 - t2 * (1.0 / 5040.0 - t2 / 362880.0)))
    else:
        num = 2.0 * phi - math.sin(2.0 * phi)
    s = math.sin(phi)
    return num / (8.0 * s * s)


@njit(cache=True, nogil=True)
def _area_ratio_slope_nb(phi, ratio):
    # d/dphi of the area ratio: 1/2 - 2 ratio cos(phi) / sin(phi)
    return 0.5 - 2.0 * ratio * math.cos(phi) / math.sin(phi)


@njit(cache=True, nogil=True)
def _solve_phi_nb(w):
    lo = 0.0
    hi = math.pi
    phi = min(6.0 * w, math.pi - math.sqrt(math.pi / (4.0 * w)))
    if not (lo < phi < hi):
        phi = 0.5 * math.pi
    for _ in range(N_ITER):
        f = _area_ratio_nb(phi)
        if f < w:
            lo = phi
        else:
            hi = phi
        step = (f - w) / _area_ratio_slope_nb(phi, f)
        if abs(step) <= 1e-15 * phi:
            return phi - step
        new = phi - step
        if not (lo < new < hi):
            new = 0.5 * (lo + hi)
        phi = new
    return phi


@njit(cache=True, nogil=True)
def _h1_distance_scalar(r, az):
    if az == 0.0:
        return r
    w = az / r / r if r > 0.0 else math.inf
    if w == math.inf:
        return math.sqrt(4.0 * math.pi * az)
    phi = _solve_phi_nb(w)
    if phi < 0.5 * math.pi:
        return r * phi / math.sin(phi)
    t = 2.0 * phi
    return phi * math.sqrt(8.0 * az / (t - math.sin(t)))


@njit(cache=True, nogil=True)
def h1_distance_numba(r, az):
    out = np.empty(r.shape[0])
    for i in range(r.shape[0]):
        out[i] = _h1_distance_scalar(r[i], az[i])
    return out


def _area_ratio_np(phi):
    t = 2.0 * phi
    t2 = t * t
    series = t * t2 * (1.0 / 6.0 - t2 * (1.0 / 120.0 - t2 * (1.0 / 5040.0 - t2 / 362880.0)))
    num = np.where(phi < 1e-2, series, t - np.sin(t))
    s = np.sin(phi)
    return num / (8.0 * s * s)


def h1_distance_numpy(r, az):
    r = np.asarray(r, dtype=float)
    az = np.asarray(az, dtype=float)
    out = np.empty_like(r)
    flat_z = az == 0.0
    with np.errstate(divide="ignore", over="ignore"):
        w_all = np.where(flat_z | (r == 0.0), np.inf, az / np.where(r > 0.0, r, 1.0) / np.where(r > 0.0, r, 1.0))
    flat_r = np.isinf(w_all) & ~flat_z
    gen = ~(flat_z | flat_r)
    out[flat_z] = r[flat_z]
    out[flat_r] = np.sqrt(4.0 * math.pi * az[flat_r])
    rg, zg = r[gen], az[gen]
    w = w_all[gen]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        phi = np.minimum(6.0 * w, math.pi - np.sqrt(math.pi / (4.0 * w)))
        phi = np.where((phi > 0) & (phi < math.pi), phi, 0.5 * math.pi)
        lo = np.zeros_like(w)
        hi = np.full_like(w, math.pi)
        active = np.arange(w.size)
        for _ in range(N_ITER):
            if active.size == 0:
                break
            p_, w_ = phi[active], w[active]
            f = _area_ratio_np(p_)
            below = f < w_
            lo[active] = np.where(below, p_, lo[active])
            hi[active] = np.where(below, hi[active], p_)
            step = (f - w_) / (0.5 - 2.0 * f * np.cos(p_) / np.sin(p_))
            new = p_ - step
            done = np.abs(step) <= 1e-15 * p_
            bad = ~((new > lo[active]) & (new < hi[active])) & ~done
            phi[active] = np.where(bad, 0.5 * (lo[active] + hi[active]), new)
            active = active[~done]
        t = 2.0 * phi
        small = rg * phi / np.sin(phi)
        large = phi * np.sqrt(8.0 * zg / (t - np.sin(t)))
    out[gen] = np.where(phi < 0.5 * math.pi, small, large)
    return out


# ---------------------------------------------------------------------------
# Endpoints of the diffusion generated by L = sum X_i^2 on a step-two group.
# Horizontal increments are sqrt(2 dt) N(0, I); the vertical update is the
# midpoint rule z_k += 1/2 <B^k x_mid, dx>, which equals 1/2 <B^k x, dx>.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def diffusion_endpoints_numba(start, normals, dt, B):
    n_paths, n_steps, d = normals.shape
    m = B.shape[0]
    out = np.empty((n_paths, d + m))
    sq = math.sqrt(2.0 * dt)
    x = np.empty(d)
    z = np.empty(m)
    dx = np.empty(d)
    for p in range(n_paths):
        for i in range(d):
            x[i] = start[i]
        for k in range(m):
            z[k] = start[d + k]
        for s in range(n_steps):
            for i in range(d):
                dx[i] = sq * normals[p, s, i]
            for k in range(m):
                acc = 0.0
                for i in range(d):
                    xi = x[i]
                    for j in range(d):
                        acc += B[k, i, j] * xi * dx[j]
                z[k] += 0.5 * acc
            for i in range(d):
                x[i] += dx[i]
        for i in range(d):
            out[p, i] = x[i]
        for k in range(m):
            out[p, d + k] = z[k]
    return out


def diffusion_endpoints_numpy(start, normals, dt, B):
    start = np.asarray(start, dtype=float)
    d = normals.shape[2]
    dx = math.sqrt(2.0 * dt) * normals
    xs = np.cumsum(dx, axis=1)
    xs += start[:d]
    x_prev = xs - dx
    w = np.einsum("kij,psi,psj->pk", B, x_prev, dx)
    out = np.empty((normals.shape[0], d + B.shape[0]))
    out[:, :d] = xs[:, -1, :]
    out[:, d:] = start[d:] + 0.5 * w
    return out


# ---------------------------------------------------------------------------
# Heisenberg heat kernel integral.  With a = r^2/(4t), c = 1 + a, w = z/t:
#     I = (1/c) int_0^S  g(s/c) ds,
#     g(mu) = mu/sinh(mu) * exp(-a (mu coth mu - 1)) * cos(mu w)
# so that p = exp(-a) I / (4 pi^2 t^2).  Points stop summing once s > 40 + a.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _kernel_integrand(mu, a, w):
    if mu < 1e-4:
        mu2 = mu * mu
        ratio = 1.0 - mu2 / 6.0
        excess = mu2 / 3.0
    else:
        sh = math.sinh(mu)
        ratio = mu / sh
        excess = mu * math.cosh(mu) / sh - 1.0
    return ratio * math.exp(-a * excess) * math.cos(mu * w)


@njit(cache=True, nogil=True)
def h1_kernel_sum_numba(a, w, s_nodes, s_weights):
    n = a.shape[0]
    out = np.empty(n)
    for i in range(n):
        c = 1.0 + a[i]
        cutoff = 40.0 + a[i]
        acc = 0.0
        for j in range(s_nodes.shape[0]):
            s = s_nodes[j]
            if s > cutoff:
                break
            acc += s_weights[j] * _kernel_integrand(s / c, a[i], w[i])
        out[i] = acc / c
    return out


def h1_kernel_sum_numpy(a, w, s_nodes, s_weights, chunk=4096):
    a = np.asarray(a, dtype=float)
    w = np.asarray(w, dtype=float)
    out = np.empty(a.shape[0])
    for lo in range(0, a.shape[0], chunk):
        ac = a[lo : lo + chunk, None]
        wc = w[lo : lo + chunk, None]
        c = 1.0 + ac
        mu = s_nodes[None, :] / c
        with np.errstate(over="ignore", invalid="ignore"):
            sh = np.sinh(mu)
            ratio = np.where(mu < 1e-4, 1.0 - mu * mu / 6.0, mu / sh)
            excess = np.where(mu < 1e-4, mu * mu / 3.0, mu * np.cosh(mu) / sh - 1.0)
        keep = s_nodes[None, :] <= 40.0 + ac
        vals = np.where(keep, ratio * np.exp(-ac * excess) * np.cos(mu * wc), 0.0)
        out[lo : lo + chunk] = (vals @ s_weights) / c[:, 0]
    return out


_GL16 = np.polynomial.legendre.leggauss(16)


def kernel_nodes(panel_width: float, s_max: float = 90.0) -> tuple[np.ndarray, np.ndarray]:
    """Composite 16-point Gauss-Legendre rule on ``[0, s_max]``."""
    n_panels = max(1, int(math.ceil(s_max / panel_width)))
    h = s_max / n_panels
    x, wt = _GL16
    left = np.arange(n_panels) * h
    nodes = (left[:, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * h * wt, n_panels)
    return nodes, weights


if HAVE_NUMBA:
    h1_distance = h1_distance_numba
    diffusion_endpoints = diffusion_endpoints_numba
    h1_kernel_sum = h1_kernel_sum_numba
else:
    h1_distance = h1_distance_numpy
    diffusion_endpoints = diffusion_endpoints_numpy
    h1_kernel_sum = h1_kernel_sum_numpy

__all__ = [
    "BACKEND",
    "h1_distance",
    "h1_distance_numba",
    "h1_distance_numpy",
    "diffusion_endpoints",
    "diffusion_endpoints_numba",
    "diffusion_endpoints_numpy",
    "h1_kernel_sum",
    "h1_kernel_sum_numba",
    "h1_kernel_sum_numpy",
    "kernel_nodes",
]
