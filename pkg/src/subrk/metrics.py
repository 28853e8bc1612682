"""Control distances d_tau on step-two Carnot groups and metric-ball volumes.

For ``tau > 0`` the distance is Riemannian, with ``{X_1..X_d, tau Z_1..tau Z_m}``
orthonormal; ``tau = 0`` is the sub-Riemannian (Carnot-Caratheodory) distance.

Geodesics are normal extremals of the left-invariant Hamiltonian
``H = 1/2 |h|^2 + 1/2 tau^2 |q|^2`` where ``h_i = <p, X_i>`` and ``q_k = <p, Z_k>``.
Along the flow ``q`` is constant and ``h(t) = exp(-t Omega) h0`` with
``Omega = sum_k q_k B^k``, so that

    x(t) = int_0^t exp(-s Omega) h0 ds,
    z_k(t) = int_0^t 1/2 x(s)^T B^k h(s) ds + tau^2 q_k t.

A geodesic run for unit time has length ``sqrt(|h0|^2 + tau^2 |q|^2)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import least_squares, minimize

from . import kernels
from ._accel import workers
from .models import CarnotModel, heisenberg

BVP_TOL = 1e-8
CHUNK = 1 << 15

_H1 = heisenberg(1)


@dataclass(frozen=True)
class TauMetric:
    model: CarnotModel
    tau: float = 0.0

    def __post_init__(self):
        if not self.tau >= 0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}")


@dataclass
class GeodesicResult:
    """A distance value with the path realizing it and solver diagnostics."""

    length: float
    path: np.ndarray
    converged: bool
    residual: float
    method: str = ""
    lower_bound: float = 0.0


@dataclass
class VolumeEstimate:
    value: float
    stderr: float
    samples: int
    seed: int
    failures: int = 0


# ---------------------------------------------------------------------------
# exponential map
# ---------------------------------------------------------------------------


def _as_point(model: CarnotModel, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (model.n,):
        raise ValueError(f"point must have {model.n} coordinates, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite coordinates")
    return p


def _gl_count(lam_max: float, span: float) -> int:
    # round up to a multiple of 8 so the node cache stays small
    n = int(20 + 1.5 * lam_max * span)
    return n + (-n) % 8


@lru_cache(maxsize=64)
def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def _flow(B: np.ndarray, h0: np.ndarray, q: np.ndarray, tau: float, ts: np.ndarray) -> np.ndarray:
    """Points of the geodesic from the identity at the increasing times ``ts``."""
    d = B.shape[1]
    omega = np.einsum("k,kij->ij", q, B)
    lam, V = np.linalg.eigh(1j * omega)
    c = V.conj().T @ h0
    lam_max = float(np.abs(lam).max()) if d else 0.0

    def h_at(s):
        return (np.exp(1j * np.outer(s, lam)) * c) @ V.T

    def x_at(s):
        theta = np.outer(s, lam)
        phi = s[:, None] * np.exp(0.5j * theta) * np.sinc(theta / (2 * math.pi))
        return (phi * c) @ V.T

    ts = np.asarray(ts, dtype=float)
    edges = np.concatenate([[0.0], ts])
    n = _gl_count(lam_max, float(np.max(np.diff(edges), initial=0.0)))
    gx, gw = _gauss_legendre(n)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    nodes = (a[:, None] + half[:, None] * (gx[None, :] + 1.0)).ravel()
    xs = x_at(nodes).real
    hs = h_at(nodes).real
    integrand = 0.5 * np.einsum("kij,si,sj->sk", B, xs, hs).reshape(len(ts), n, -1)
    inc = np.einsum("j,tjk->tk", gw, integrand) * half[:, None]
    z = np.cumsum(inc, axis=0) + tau * tau * np.outer(ts, q)
    return np.hstack([x_at(ts).real, z])


def exponential_map(model: CarnotModel, h0, q, tau: float = 0.0, t: float = 1.0) -> np.ndarray:
    """Endpoint at time ``t`` of the geodesic from the identity with covector ``(h0, q)``."""
    h0 = np.asarray(h0, dtype=float)
    q = np.asarray(q, dtype=float)
    return _flow(model.B, h0, q, tau, np.array([t]))[0]


def geodesic_path(model: CarnotModel, h0, q, tau: float = 0.0, n_points: int = 33) -> np.ndarray:
    ts = np.linspace(0.0, 1.0, n_points)[1:]
    pts = _flow(model.B, np.asarray(h0, float), np.asarray(q, float), tau, ts)
    return np.vstack([np.zeros(model.n), pts])


def hamiltonian_endpoint(model: CarnotModel, h0, q, tau: float = 0.0, t: float = 1.0,
                         rtol: float = 1e-12, atol: float = 1e-13) -> np.ndarray:
    """Endpoint from integrating the canonical Hamilton equations in coordinates.

    Independent of :func:`exponential_map`: it uses the frame coefficients
    directly and a generic adaptive integrator.
    """
    B = model.B
    d, m = model.d, model.m

    def rhs(_, y):
        x, px, pz = y[:d], y[d + m : 2 * d + m], y[2 * d + m :]
        # z-coefficient of X_i is c_ik = 1/2 sum_j B^k_ji x_j
        c = 0.5 * np.einsum("kji,j->ik", B, x)
        h = px + c @ pz
        dx = h
        dz = c.T @ h + tau * tau * pz
        # dH/dx_j = sum_i h_i sum_k pz_k 1/2 B^k_ji
        dpx = -0.5 * np.einsum("i,k,kji->j", h, pz, B)
        return np.concatenate([dx, dz, dpx, np.zeros(m)])

    y0 = np.concatenate([np.zeros(d + m), np.asarray(h0, float), np.asarray(q, float)])
    sol = solve_ivp(rhs, (0.0, t), y0, method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"Hamiltonian integration failed: {sol.message}")
    return sol.y[: d + m, -1]


# ---------------------------------------------------------------------------
# shooting
# ---------------------------------------------------------------------------


def homogeneous_norm(model: CarnotModel, p) -> float:
    p = np.asarray(p, dtype=float)
    x, z = p[: model.d], p[model.d :]
    return float((np.dot(x, x) ** 2 + np.dot(z, z)) ** 0.25)


def chord_lower_bound(model: CarnotModel, p, tau: float = 0.0) -> float:
    """Cheap lower bound on ``d_tau(0, p)``.

    Along a path of length ``L`` the horizontal displacement is at most ``L`` and
    each vertical coordinate moves at most ``|B^k| L^2 / 4 + tau L``.
    """
    p = np.asarray(p, dtype=float)
    x, z = p[: model.d], p[model.d :]
    best = float(np.linalg.norm(x))
    for k in range(model.m):
        a = np.linalg.norm(model.B[k], 2) / 4.0
        zk = abs(z[k])
        if zk == 0:
            continue
        if a == 0:
            root = zk / tau
        else:
            root = (-tau + math.sqrt(tau * tau + 4 * a * zk)) / (2 * a)
        best = max(best, root)
    return best


def _initial_covectors(model: CarnotModel, target: np.ndarray, tau: float, n_grid: int = 16):
    d, m = model.d, model.m
    x, z = target[:d], target[d:]
    out = []
    # straight chord: exact for pure vertical targets when tau > 0
    out.append((x.copy(), z / (tau * tau) if tau > 0 else np.zeros(m)))
    zn = np.linalg.norm(z)
    zhat = z / zn if zn > 0 else np.eye(m)[0]
    scale = np.linalg.norm(x) + 2.0 * math.sqrt(zn)
    # one turn in the plane of the dominant bracket: the sub-Riemannian guess
    rng = np.random.default_rng(20240917)
    for j in range(n_grid):
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        turn = math.pi * (0.25 + 1.75 * (j // 2) / max(1, n_grid // 2 - 1))
        sign = 1.0 if j % 2 == 0 else -1.0
        out.append((scale * u, sign * turn * zhat))
    return out


def _shoot(model: CarnotModel, target: np.ndarray, tau: float, guesses, max_nfev: int = 400):
    B = model.B
    d = model.d
    sols = []
    for h0, q in guesses:

        def resid(v):
            return _flow(B, v[:d], v[d:], tau, np.array([1.0]))[0] - target

        try:
            res = least_squares(resid, np.concatenate([h0, q]), method="lm", xtol=1e-15, ftol=1e-15,
                                gtol=1e-15, max_nfev=max_nfev)
        except (np.linalg.LinAlgError, ValueError):
            continue
        err = float(np.linalg.norm(res.fun))
        v = res.x
        length = math.sqrt(float(v[:d] @ v[:d]) + tau * tau * float(v[d:] @ v[d:]))
        sols.append((length, err, v))
    return sols


def shoot_geodesic(model: CarnotModel, x, y, tau: float = 0.0, n_grid: int = 16, tol: float = BVP_TOL,
                   extra_guesses=()) -> GeodesicResult:
    """Geodesic shooting between ``x`` and ``y``; minimum over converged solutions.

    The target ``x^-1 y`` is first rescaled by a dilation to unit homogeneous
    norm (``d_tau(p) = d_{lam tau}(delta_lam p) / lam``), which keeps the
    least-squares problem well conditioned at all scales.  Under this rescaling
    ``h0`` scales by ``lam`` and ``q`` is unchanged.
    """
    x = _as_point(model, x)
    y = _as_point(model, y)
    target = model.mul(model.inv(x), y)
    nrm = homogeneous_norm(model, target)
    lower = chord_lower_bound(model, target, tau)
    if nrm == 0:
        return GeodesicResult(0.0, np.vstack([x, y]), True, 0.0, "trivial", 0.0)
    lam = 1.0 / nrm
    t_scaled = model.dil(lam, target)
    tau_s = lam * tau
    guesses = _initial_covectors(model, t_scaled, tau_s, n_grid)
    guesses += [(np.asarray(h, float) * lam, np.asarray(q, float)) for h, q in extra_guesses]
    sols = _shoot(model, t_scaled, tau_s, guesses)
    d = model.d
    best = None
    for length, _, v in sols:
        # residual in the caller's coordinates
        end = _flow(model.B, v[:d] / lam, v[d:], tau, np.array([1.0]))[0]
        err = float(np.linalg.norm(end - target))
        if err < tol and (best is None or length < best[0]):
            best = (length, err, v)
    if best is None:
        if not sols:
            return GeodesicResult(math.nan, np.vstack([x, y]), False, math.inf, "shooting", lower)
        length, err, v = min(sols, key=lambda s: s[1])
        converged = False
    else:
        length, err, v = best
        converged = True
    h0, q = v[:d] / lam, v[d:]
    path = model.mul(x, geodesic_path(model, h0, q, tau))
    return GeodesicResult(length / lam, path, converged, err, "shooting", lower)


# ---------------------------------------------------------------------------
# path-energy oracle
# ---------------------------------------------------------------------------


def _pe_endpoint(B, u, w, n):
    """Endpoint of the piecewise-constant control (u_j, w_j), each for time 1/n."""
    xs = np.cumsum(u, axis=0) / n
    x_prev = xs - u / n
    z = w.sum(axis=0) / n + 0.5 / n * np.einsum("kij,si,sj->k", B, x_prev, u)
    return np.concatenate([xs[-1], z]), x_prev


def path_energy_distance(model: CarnotModel, x, y, tau: float = 0.0, n_segments: int = 64, starts: int = 4,
                         seed: int = 0, maxiter: int = 500) -> GeodesicResult:
    """Distance by direct minimization of the discrete path energy.

    Controls are constant on ``n_segments`` pieces: horizontal ``u_j`` and, for
    ``tau > 0``, vertical ``w_j`` (speed squared ``|u|^2 + |w|^2 / tau^2``).
    The endpoint is imposed as an equality constraint and the energy is
    minimized with SLSQP from several deterministic starts.  The result has
    discretization error of order ``1 / n_segments^2`` in the energy.
    """
    x = _as_point(model, x)
    y = _as_point(model, y)
    target = model.mul(model.inv(x), y)
    B = model.B
    d, m, n = model.d, model.m, n_segments
    nu = n * d
    nw = n * m if tau > 0 else 0
    if homogeneous_norm(model, target) == 0:
        return GeodesicResult(0.0, np.vstack([x, y]), True, 0.0, "path-energy", 0.0)

    def split(v):
        u = v[:nu].reshape(n, d)
        w = v[nu:].reshape(n, m) if nw else np.zeros((n, m))
        return u, w

    def energy(v):
        u, w = split(v)
        e = float((u * u).sum()) / n
        g = 2.0 * v / n
        if nw:
            e += float((w * w).sum()) / (n * tau * tau)
            g[nu:] /= tau * tau
        return e, g

    def cons(v):
        u, w = split(v)
        return _pe_endpoint(B, u, w, n)[0] - target

    def cons_jac(v):
        u, w = split(v)
        _, x_prev = _pe_endpoint(B, u, w, n)
        J = np.zeros((d + m, nu + nw))
        eye = np.eye(d) / n
        for j in range(n):
            J[:d, j * d : (j + 1) * d] = eye
        # dz_k/du_i = 1/(2n) [B^k^T x_prev_i + 1/n sum_{j>i} B^k u_j]
        Bu = np.einsum("kij,sj->ski", B, u)
        tail = np.cumsum(Bu[::-1], axis=0)[::-1] - Bu
        dz = 0.5 / n * (np.einsum("kji,sj->ski", B, x_prev) + tail / n)
        J[d:, :nu] = dz.transpose(1, 0, 2).reshape(m, nu)
        if nw:
            for j in range(n):
                J[d:, nu + j * m : nu + (j + 1) * m] = np.eye(m) / n
        return J

    rng = np.random.default_rng(seed)
    xt, zt = target[:d], target[d:]
    s = np.linspace(0.0, 1.0, n, endpoint=False) + 0.5 / n
    radius = math.sqrt(float(np.abs(zt).sum())) + 1e-3
    best = None
    for k in range(starts):
        a, b = rng.standard_normal(d), rng.standard_normal(d)
        loop = 2 * math.pi * radius * (np.outer(np.cos(2 * math.pi * s), a) + np.outer(np.sin(2 * math.pi * s), b))
        u0 = np.tile(xt, (n, 1)) + (loop if k > 0 or nw == 0 else 0.0)
        v0 = u0.ravel()
        if nw:
            v0 = np.concatenate([v0, np.tile(zt, n)])
        res = minimize(energy, v0, jac=True, method="SLSQP",
                       constraints=[{"type": "eq", "fun": cons, "jac": cons_jac}],
                       options={"maxiter": maxiter, "ftol": 1e-15})
        err = float(np.linalg.norm(cons(res.x)))
        e = energy(res.x)[0]
        if best is None or (err < 1e-7 and (best[1] >= 1e-7 or e < best[0])):
            best = (e, err, res.x)
    e, err, v = best
    u, w = split(v)
    xs = np.cumsum(u, axis=0) / n
    zs = np.cumsum(w / n + 0.5 / n * np.einsum("kij,si,sj->sk", B, xs - u / n, u), axis=0)
    path = model.mul(x, np.vstack([np.zeros(d + m), np.hstack([xs, zs])]))
    return GeodesicResult(math.sqrt(e), path, err < 1e-7, err, "path-energy", chord_lower_bound(model, target, tau))


def path_energy_extrapolated(model: CarnotModel, x, y, tau: float = 0.0, n_segments: int = 64,
                             **kw) -> GeodesicResult:
    """Richardson extrapolation of the path energy over ``n`` and ``2n`` segments."""
    r1 = path_energy_distance(model, x, y, tau, n_segments, **kw)
    r2 = path_energy_distance(model, x, y, tau, 2 * n_segments, **kw)
    e = (4.0 * r2.length**2 - r1.length**2) / 3.0
    return GeodesicResult(math.sqrt(max(e, 0.0)), r2.path, r1.converged and r2.converged,
                          max(r1.residual, r2.residual), "path-energy-richardson", r2.lower_bound)


# ---------------------------------------------------------------------------
# public distances
# ---------------------------------------------------------------------------


def _is_h1(model: CarnotModel) -> bool:
    return model == _H1


def _h1_geodesic_path(p: np.ndarray, length: float, n_points: int = 33) -> np.ndarray:
    r = math.hypot(p[0], p[1])
    az = abs(p[2])
    if az == 0:
        return np.linspace(0.0, 1.0, n_points)[:, None] * p[None, :]
    w = az / r / r if r > 0 else math.inf
    if w == math.inf:
        phi = math.pi
        chord = np.array([1.0, 0.0])
    else:
        # recover the half turning angle from length = r phi / sin phi
        phi = _solve_phi(w)
        chord = p[:2] / r
    best = None
    for sign in (1.0, -1.0):
        c, s = math.cos(sign * phi), math.sin(sign * phi)
        h0 = length * np.array([c * chord[0] + s * chord[1], -s * chord[0] + c * chord[1]])
        q = np.array([sign * 2.0 * phi])
        path = geodesic_path(_H1, h0, q, 0.0, n_points)
        err = np.linalg.norm(path[-1] - p)
        if best is None or err < best[0]:
            best = (err, path)
    return best[1]


def _solve_phi(w: float) -> float:
    return float(kernels._solve_phi_nb(w))


def d_cc(model: CarnotModel, x, y, with_path: bool = True) -> GeodesicResult:
    """Sub-Riemannian distance.

    Closed form on the first Heisenberg group; elsewhere geodesic shooting at
    ``tau = 0`` seeded by a path-energy estimate, with the path-energy value
    as the fallback when shooting does not converge.
    """
    xa = _as_point(model, x)
    ya = _as_point(model, y)
    p = model.mul(model.inv(xa), ya)
    if _is_h1(model):
        r = math.hypot(p[0], p[1])
        length = float(kernels.h1_distance(np.array([r]), np.array([abs(p[2])]))[0])
        path = model.mul(xa, _h1_geodesic_path(p, length)) if with_path else np.vstack([xa, ya])
        return GeodesicResult(length, path, True, 0.0, "closed-form", chord_lower_bound(model, p))
    pe = path_energy_distance(model, np.zeros(model.n), p, 0.0, n_segments=32, starts=2)
    extra = []
    if pe.converged:
        # covector guesses on the sphere of the estimated length
        rng = np.random.default_rng(7)
        for _ in range(4):
            u = rng.standard_normal(model.d)
            extra.append((pe.length * u / np.linalg.norm(u), rng.standard_normal(model.m) * math.pi))
    res = shoot_geodesic(model, xa, ya, 0.0, extra_guesses=extra)
    if res.converged and (not pe.converged or res.length <= pe.length * (1 + 1e-6)):
        return res
    pe.path = model.mul(xa, pe.path)
    pe.converged = False if not res.converged else pe.converged
    return pe


def d_tau(model: CarnotModel, x, y, tau: float) -> GeodesicResult:
    """Riemannian control distance with ``{X_i, tau Z_k}`` orthonormal.

    Geodesic shooting over a deterministic grid of initial covectors; when no
    shot converges the path-energy minimizer is returned with
    ``converged = False``.  ``tau <= 0`` is routed to :func:`d_cc`.
    """
    if tau <= 0:
        return d_cc(model, x, y)
    res = shoot_geodesic(model, x, y, tau)
    if res.converged:
        return res
    pe = path_energy_distance(model, x, y, tau)
    pe.converged = False
    return pe


def distance(metric: TauMetric, x, y) -> GeodesicResult:
    return d_cc(metric.model, x, y) if metric.tau == 0 else d_tau(metric.model, x, y, metric.tau)


def distances_from(metric: TauMetric, x, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distances from ``x`` to each row of ``pts`` and per-point convergence flags."""
    model = metric.model
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    rel = model.mul(model.inv(np.asarray(x, float))[None, :], pts)
    if metric.tau == 0 and _is_h1(model):
        r = np.hypot(rel[:, 0], rel[:, 1])
        return kernels.h1_distance(r, np.abs(rel[:, 2])), np.ones(len(pts), dtype=bool)
    zero = np.zeros(model.n)
    out = np.empty(len(pts))
    ok = np.empty(len(pts), dtype=bool)
    for i, p in enumerate(rel):
        res = distance(metric, zero, p)
        out[i], ok[i] = res.length, res.converged
    return out, ok


# ---------------------------------------------------------------------------
# checks and volumes
# ---------------------------------------------------------------------------


@dataclass
class MonotonicityReport:
    taus: list
    values: list
    d_cc: float
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def monotonicity_check(model: CarnotModel, x, y, tau_grid, rel_tol: float = 1e-6) -> MonotonicityReport:
    """Check ``d_tau' <= d_tau <= d_cc`` for ``tau' >= tau`` on an increasing grid."""
    taus = [float(t) for t in tau_grid]
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("tau grid must be strictly increasing")
    dcc = d_cc(model, x, y).length
    vals = [d_tau(model, x, y, t).length for t in taus]
    viol = []
    prev_tau, prev = 0.0, dcc
    for t, v in zip(taus, vals):
        if v > prev * (1 + rel_tol) + 1e-12:
            viol.append({"tau": t, "previous_tau": prev_tau, "value": v, "previous": prev})
        prev_tau, prev = t, v
    return MonotonicityReport(taus, vals, dcc, viol)


def _sampling_box(model: CarnotModel, center: np.ndarray, r: float, tau: float):
    """Euclidean box containing the left translate by ``center`` of the ball ``B(0, r)``."""
    d = model.d
    B = model.B
    half = np.empty(model.n)
    half[:d] = r
    for k in range(model.m):
        vert = np.linalg.norm(B[k], 2) * r * r / 4.0 + tau * r
        # translation adds 1/2 <B^k c_x, x> with |x_i| <= r
        shift = 0.5 * r * np.abs(B[k].T @ center[:d]).sum()
        half[d + k] = vert + shift
    return center - half, center + half


def _chunk_seeds(seed: int, n_samples: int, chunk: int = CHUNK):
    starts = list(range(0, n_samples, chunk))
    return [(i, s, min(chunk, n_samples - s)) for i, s in enumerate(starts)]


def _map_chunks(fn, chunks):
    nw = workers()
    if nw == 1 or len(chunks) == 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=nw) as ex:
        return list(ex.map(fn, chunks))


def ball_volume(model: CarnotModel, x, r: float, metric: TauMetric | None = None, n_samples: int = 100_000,
                seed: int = 0, boundary_tol: float | None = None, max_failure_rate: float = 0.01) -> VolumeEstimate:
    """Monte Carlo Lebesgue measure of ``B(x, r)`` for ``d_cc`` or ``d_tau``.

    Uniform samples in a Euclidean box that contains the ball; samples within
    ``boundary_tol`` of the sphere count one half.  Chunk ``i`` draws from
    ``SeedSequence([seed, i])`` so the estimate is independent of the worker
    count.
    """
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    if n_samples < 2:
        raise ValueError("need at least two samples")
    metric = metric or TauMetric(model, 0.0)
    center = _as_point(model, x)
    lo, hi = _sampling_box(model, center, r, metric.tau)
    box_vol = float(np.prod(hi - lo))
    exact = metric.tau == 0 and _is_h1(model)
    tol = boundary_tol if boundary_tol is not None else (1e-12 * r if exact else 1e-6 * r)

    def run(chunk):
        i, _, size = chunk
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        pts = lo + (hi - lo) * rng.random((size, model.n))
        dist, ok = distances_from(metric, center, pts)
        w = np.where(np.abs(dist - r) < tol, 0.5, (dist < r).astype(float))
        w = np.where(ok, w, 0.0)
        return w.sum(), (w * w).sum(), int((~ok).sum())

    parts = _map_chunks(run, _chunk_seeds(seed, n_samples))
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    fails = sum(p[2] for p in parts)
    if fails > max_failure_rate * n_samples:
        raise RuntimeError(f"distance solver failed on {fails} of {n_samples} samples")
    n = n_samples
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / (n - 1)
    return VolumeEstimate(box_vol * mean, box_vol * math.sqrt(var / n), n, seed, fails)


def h1_unit_ball_volume() -> float:
    """Lebesgue measure of the unit Carnot-Caratheodory ball of the first Heisenberg group.

    Unit-length geodesics from 0 with half turning angle ``phi`` end at radius
    ``sin(phi)/phi`` and height ``(2 phi - sin 2 phi)/(8 phi^2)``; these
    endpoints sweep the boundary for ``phi`` in ``(0, pi]``, so the volume is a
    one-dimensional integral of the solid of revolution.
    """
    from scipy.integrate import quad

    def integrand(phi):
        r = math.sin(phi) / phi
        dr = (phi * math.cos(phi) - math.sin(phi)) / (phi * phi)
        z = (2 * phi - math.sin(2 * phi)) / (8 * phi * phi)
        return 2 * math.pi * r * 2 * z * (-dr)

    val, _ = quad(integrand, 0.0, math.pi, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


@dataclass
class InclusionReport:
    R: float
    tau: float
    radius_cc: float
    n_samples: int
    max_dcc: float
    witnesses: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.witnesses


def sample_tau_ball(model: CarnotModel, x, R: float, tau: float, n_samples: int, seed: int = 0) -> np.ndarray:
    """Points ``y`` with ``d_tau(x, y) <= R``, as endpoints of geodesics of length at most ``R``."""
    x = _as_point(model, x)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    d, m = model.d, model.m
    out = np.empty((n_samples, model.n))
    for i in range(n_samples):
        v = rng.standard_normal(d + m)
        v /= np.linalg.norm(v)
        length = R * rng.random() ** (1.0 / (d + m))
        h0 = length * v[:d]
        q = length * v[d:] / tau
        out[i] = exponential_map(model, h0, q, tau)
    return model.mul(x[None, :], out)


def ball_inclusion_check(model: CarnotModel, x, R: float, tau: float, C7: float, rho1_minus: float = 0.0,
                         n_samples: int = 1000, seed: int = 0) -> InclusionReport:
    """Check ``B_tau(x, R)`` is contained in ``B(x, A sqrt(R))``.

    ``A = C7 (1 + sqrt(rho1_minus)) max(1, sqrt(R))`` covers both regimes of
    the distance comparison ``d <= C7 (1 + sqrt(rho1^-)) max(sqrt(d_tau), d_tau)``.
    """
    if not (R > 0 and tau > 0):
        raise ValueError("need R > 0 and tau > 0")
    x = _as_point(model, x)
    A = C7 * (1 + math.sqrt(rho1_minus)) * max(1.0, math.sqrt(R))
    radius = A * math.sqrt(R)
    pts = sample_tau_ball(model, x, R, tau, n_samples, seed)
    dist, ok = distances_from(TauMetric(model, 0.0), x, pts)
    wit = [{"point": pts[i].tolist(), "d_cc": float(dist[i])} for i in np.flatnonzero((dist > radius) | ~ok)]
    return InclusionReport(R, tau, radius, n_samples, float(dist.max(initial=0.0)), wit)
