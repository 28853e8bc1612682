"""Explicit bounds of the Li-Yau / Harnack / doubling family as plain formulas.

Every evaluator is a pure function of its numeric inputs.  Residuals are
signed so that a nonnegative value means the inequality holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .calculus import CDParams

LN2 = math.log(2.0)


def _p(params: CDParams) -> CDParams:
    return params.as_floats()


# ---------------------------------------------------------------------------
# Li-Yau
# ---------------------------------------------------------------------------


def li_yau_constant(params: CDParams, t: float) -> float:
    """``d (rho1^-)^2 t / 6 + rho1^- D / 2 + D^2 / (2 d t)``."""
    p = _p(params)
    rm = p.rho1_minus
    return p.d * rm * rm * t / 6.0 + rm * p.D / 2.0 + p.D * p.D / (2.0 * p.d * t)


def li_yau_rhs(params: CDParams, LP_over_P: float, t: float) -> float:
    p = _p(params)
    return (p.D / p.d + 2.0 * p.rho1_minus * t / 3.0) * LP_over_P + li_yau_constant(params, t)


def _check_terms(terms):
    if not terms.P > 0:
        raise ValueError(f"P_t f must be positive, got {terms.P}")


def li_yau_residual(terms, params: CDParams, t: float) -> float:
    """RHS - LHS of the Li-Yau estimate; ``terms`` carries ``P, gamma, gamma_Z, LP``."""
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    _check_terms(terms)
    p = _p(params)
    lhs = terms.gamma + 2.0 * p.rho2 * t / 3.0 * terms.gamma_Z
    return li_yau_rhs(params, terms.LP / terms.P, t) - lhs


def li_yau_tau_residual(terms, params: CDParams, t: float, tau: float) -> float:
    """Riemannian-distance form: prefactor ``(1 + 3 tau^2 / (2 rho2 t))^-1`` on ``gamma + tau^2 gamma_Z``."""
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    _check_terms(terms)
    p = _p(params)
    lhs = (terms.gamma + tau * tau * terms.gamma_Z) / (1.0 + 3.0 * tau * tau / (2.0 * p.rho2 * t))
    return li_yau_rhs(params, terms.LP / terms.P, t) - lhs


# ---------------------------------------------------------------------------
# Harnack
# ---------------------------------------------------------------------------


def harnack_exponent(params: CDParams, tau: float, dist: float, s: float, t: float) -> float:
    """Logarithm of :func:`harnack_rhs`."""
    if not 0 < s < t:
        raise ValueError(f"need 0 < s < t, got s={s}, t={t}")
    if dist < 0:
        raise ValueError("distance must be nonnegative")
    p = _p(params)
    rm = p.rho1_minus
    bracket = (p.D / p.d + tau * tau * rm / p.rho2) + rm * (t + s) / 3.0 \
        + 3.0 * tau * tau * p.D / (2.0 * (t - s) * p.rho2 * p.d) * math.log(t / s)
    return (p.D / 2.0) * math.log(t / s) + p.d * rm * (t - s) / 4.0 + dist * dist / (4.0 * (t - s)) * bracket


def harnack_rhs(params: CDParams, tau: float, dist: float, s: float, t: float) -> float:
    return math.exp(harnack_exponent(params, tau, dist, s, t))


# ---------------------------------------------------------------------------
# volume growth
# ---------------------------------------------------------------------------


def volume_upper_bound(params: CDParams, C_input: float, R0: float, R: float, p_xx_R0sq: float) -> float:
    """``C exp(2 d rho1^- R0^2) / (R0^D p(x,x,R0^2)) * R^D exp(2 d rho1^- R^2)``."""
    if not R0 > 0:
        raise ValueError("R0 must be positive")
    if R < R0:
        raise ValueError(f"need R >= R0, got R={R}, R0={R0}")
    if not p_xx_R0sq > 0:
        raise ValueError("kernel value must be positive")
    p = _p(params)
    k = 2.0 * p.d * p.rho1_minus
    return C_input * math.exp(k * R0 * R0) / (R0**p.D * p_xx_R0sq) * R**p.D * math.exp(k * R * R)


# ---------------------------------------------------------------------------
# growth functions g, G, Psi_R, U, A
# ---------------------------------------------------------------------------


def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass
class GrowthFunctions:
    """``g``, ``G``, ``C0``, ``C0*``, ``C0**``, ``Psi_R``, ``U`` and ``A`` for given CD parameters.

    With ``v = s^3`` the primitive becomes ``G(u) = int_0^{u^(1/3)} 3 s^3 / (s^4 + (1+c) s^2 + c) ds``
    (``c = sqrt(D*/2)``), a smooth rational integrand.  For the constant
    ``C0 = lim G(u) - ln u`` the tail ``int_1^inf (g(v) - 1/v) dv`` is mapped to
    ``y = 1/s`` in ``(0, 1]``, where it is again smooth.  Both integrals use
    composite Gauss-Legendre rules with ``panels`` panels of ``order`` nodes.
    """

    params: CDParams
    panels: int = 8
    order: int = 24
    tol: float = 1e-12
    _nodes: tuple = field(init=False, repr=False)

    def __post_init__(self):
        x, w = _gl(self.order)
        k = np.arange(self.panels)[:, None]
        self._nodes = (((k + x[None, :]) / self.panels).ravel(), np.tile(w / self.panels, self.panels))

    @property
    def c(self) -> float:
        return math.sqrt(float(self.params.Dstar) / 2.0)

    def g(self, v):
        v = np.asarray(v, dtype=float)
        c = self.c
        cube = np.cbrt(v)
        return 1.0 / (v + (1.0 + c) * cube + c / cube)

    def _head(self, s):
        c = self.c
        return 3.0 * s**3 / (s**4 + (1.0 + c) * s * s + c)

    def _tail(self, y):
        c = self.c
        return 3.0 * y * ((1.0 + c) + c * y * y) / (1.0 + (1.0 + c) * y * y + c * y**4)

    def _integrate(self, f, upper: float) -> float:
        x, w = self._nodes
        return float(upper * (w @ f(upper * x)))

    @cached_property
    def C0(self) -> float:
        return self._integrate(self._head, 1.0) - self._integrate(self._tail, 1.0)

    @property
    def C0_star(self) -> float:
        return self.C0 - LN2

    @cached_property
    def C0_2star(self) -> float:
        return self.G(math.sqrt(LN2)) - self.C0_star

    def R(self, u: float) -> float:
        """Remainder ``G(u) - ln u - C0``."""
        if not u > 0:
            raise ValueError("u must be positive")
        if u >= 1.0:
            return self._integrate(self._tail, u ** (-1.0 / 3.0))
        return self.G(u) - math.log(u) - self.C0

    def G(self, u: float) -> float:
        if u < 0:
            raise ValueError("u must be nonnegative")
        if u == 0:
            return 0.0
        if u <= 1.0:
            return self._integrate(self._head, u ** (1.0 / 3.0))
        return math.log(u) + self.C0 + self.R(u)

    def G_closed(self, u: float) -> float:
        """Partial-fraction closed form, used as an independent check."""
        c = self.c
        S = u ** (2.0 / 3.0)
        if abs(c - 1.0) < 1e-12:
            return 1.5 * (math.log1p(S) - S / (1.0 + S))
        return 1.5 / (c - 1.0) * (c * math.log1p(S / c) - math.log1p(S))

    def C0_closed(self) -> float:
        c = self.c
        if abs(c - 1.0) < 1e-12:
            return -1.5
        return -1.5 * c * math.log(c) / (c - 1.0)

    def psi(self, R: float, u: float) -> float:
        p = _p(self.params)
        return math.log(1.0 / u) - math.sqrt(p.d * p.rho1_minus) * R * u

    def U(self, R: float) -> float:
        """``Psi_R^{-1}(C0**)`` by bisection in ``ln u``."""
        if R < 0:
            raise ValueError("R must be nonnegative")
        target = self.C0_2star
        lo, hi = 1e-12, 1.0
        if self.psi(R, lo) < target:
            raise ArithmeticError("U(R) below the bisection floor 1e-12")
        while self.psi(R, hi) > target:
            hi *= 2.0
        llo, lhi = math.log(lo), math.log(hi)
        for _ in range(200):
            mid = 0.5 * (llo + lhi)
            if self.psi(R, math.exp(mid)) > target:
                llo = mid
            else:
                lhi = mid
            if lhi - llo <= 1e-15:
                break
        return math.exp(0.5 * (llo + lhi))

    def A(self, r: float) -> float:
        return min(self.U(r) ** 2, 1.0)

    @property
    def C1(self) -> float:
        """Constant of the sandwich ``C1 / (1 + d rho1^- R^2) <= A(R) <= 1``."""
        return 1.0 / (2.0 * max(1.0, math.exp(2.0 * self.C0_2star)))

    def U_lower(self, R: float) -> float:
        p = _p(self.params)
        return 1.0 / (math.sqrt(p.d * p.rho1_minus) * R + math.exp(self.C0_2star))


def growth_functions(params: CDParams, **kw) -> GrowthFunctions:
    return GrowthFunctions(params, **kw)


def A_of_r(gf: GrowthFunctions, r: float, check: bool = True) -> float:
    if r < 0:
        raise ValueError("r must be nonnegative")
    a = gf.A(r)
    if check:
        p = _p(gf.params)
        low = gf.C1 / (1.0 + p.d * p.rho1_minus * r * r)
        if not (low <= a * (1 + 1e-12) and a <= 1.0):
            raise AssertionError(f"A({r}) = {a} outside [{low}, 1]")
    return a


# ---------------------------------------------------------------------------
# heat content decay in G-form
# ---------------------------------------------------------------------------


@dataclass
class PairCheck:
    inputs: dict
    lhs: float
    rhs: float
    tol: float

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs

    @property
    def ok(self) -> bool:
        return self.residual >= -self.tol


def _u_of(P: float) -> float:
    if not 0 < P < 1:
        raise ValueError(f"P_t f must lie in (0, 1), got {P}")
    return math.sqrt(-math.log(P))


def G_decay_check(times, values, gf: GrowthFunctions, tol: float = 1e-3) -> list[PairCheck]:
    """``G(u(t)) >= G(u(s)) - ln(t/s)/2 - sqrt(d rho1^-)(sqrt t - sqrt s)`` on consecutive times.

    ``values[i]`` is ``P_{times[i]} f(x)`` for some ``0 <= f <= 1``.
    """
    p = _p(gf.params)
    k = math.sqrt(p.d * p.rho1_minus)
    out = []
    for (s, Ps), (t, Pt) in zip(zip(times, values), zip(times[1:], values[1:])):
        if not s <= t:
            raise ValueError("times must be nondecreasing")
        lhs = gf.G(_u_of(Pt))
        rhs = gf.G(_u_of(Ps)) - (0.5 * math.log(t / s) if t > s else 0.0) - k * (math.sqrt(t) - math.sqrt(s))
        out.append(PairCheck({"s": s, "t": t, "P_s": Ps, "P_t": Pt}, lhs, rhs, tol))
    return out


def G_lower_check(times, values, r: float, gf: GrowthFunctions, tol: float = 1e-3) -> list[PairCheck]:
    """``G(u(t)) >= ln(r / sqrt t) + C0* - sqrt(d rho1^- t)`` for ``f = 1_{B(x,r)^c}``."""
    p = _p(gf.params)
    out = []
    for t, Pt in zip(times, values):
        lhs = gf.G(_u_of(Pt))
        rhs = math.log(r / math.sqrt(t)) + gf.C0_star - math.sqrt(p.d * p.rho1_minus * t)
        out.append(PairCheck({"t": t, "P_t": Pt, "r": r}, lhs, rhs, tol))
    return out


@dataclass
class SmallTimeReport:
    s: list
    values: list
    target: float
    running_inf: float
    resolution_limited: bool
    tol: float

    @property
    def ok(self) -> bool:
        return self.running_inf >= self.target - self.tol

    @property
    def increasing(self) -> bool:
        return all(b >= a for a, b in zip(self.values, self.values[1:]))


def small_time_residual(r: float, s_grid, values, tol: float = 0.05, floor: float = 1e-14) -> SmallTimeReport:
    """Trend check for ``liminf_{s->0} -s ln P_s 1_{B(x,r)^c}(x) >= r^2/4``.

    ``s_grid`` is decreasing and ``values[i] = P_{s_i} f(x)``.  Underflowed
    values, or values below ``floor`` (quadrature noise), end the resolvable
    range.  The running infimum is taken over the smallest quarter of the
    resolvable grid (at least two points).
    """
    s_grid = [float(s) for s in s_grid]
    if any(b >= a for a, b in zip(s_grid, s_grid[1:])):
        raise ValueError("s grid must be decreasing")
    vals, used = [], []
    limited = False
    for s, P in zip(s_grid, values):
        if not P > floor:
            limited = True
            break
        vals.append(-s * math.log(P))
        used.append(s)
    if not vals:
        raise ValueError("no resolvable grid point")
    tail = vals[-max(2, math.ceil(len(vals) / 4)) :]
    return SmallTimeReport(used, vals, r * r / 4.0, min(tail), limited, tol)


# ---------------------------------------------------------------------------
# kernel bounds
# ---------------------------------------------------------------------------


def _gauss_factor(params: CDParams, dist: float, t: float, tau: float) -> float:
    p = _p(params)
    rm = p.rho1_minus
    inner = p.D / p.d + rm * t / 2.0 + 2.0 * tau * tau / t * (rm / p.rho2 + 3.0 * p.D * LN2 / (2.0 * p.rho2 * p.d))
    return math.exp(-dist * dist / (2.0 * t) * inner)


def kernel_lower_bound(params: CDParams, gf: GrowthFunctions, vol_x_sqrt_t_half: float, dist_tau: float, t: float,
                       tau: float = 0.0) -> float:
    """Off-diagonal lower bound; ``vol_x_sqrt_t_half`` is ``mu(B(x, sqrt(t)/2))``."""
    if not t > 0:
        raise ValueError("time must be positive")
    if not vol_x_sqrt_t_half > 0:
        raise ValueError("volume must be positive")
    p = _p(params)
    A = gf.A(math.sqrt(t) / 2.0)
    pref = A ** (p.D / 2.0) * 2.0 ** (-p.D / 2.0) * math.exp(-p.d * p.rho1_minus * t / 4.0) / (4.0 * vol_x_sqrt_t_half)
    return pref * _gauss_factor(params, dist_tau, t, tau)


def kernel_lower_bound_diag(params: CDParams, gf: GrowthFunctions, vol_x_sqrt_half_t: float, t: float) -> float:
    """On-diagonal bound; ``vol_x_sqrt_half_t`` is ``mu(B(x, sqrt(t/2)))``."""
    if not t > 0:
        raise ValueError("time must be positive")
    if not vol_x_sqrt_half_t > 0:
        raise ValueError("volume must be positive")
    p = _p(params)
    A = gf.A(math.sqrt(t / 2.0))
    return A ** (p.D / 2.0) * math.exp(-p.d * p.rho1_minus * t / 4.0) / (4.0 * vol_x_sqrt_half_t)


def upper_bound_alpha(eps: float) -> float:
    """``alpha`` with ``4 (1 + alpha)^4 = 4 + eps``, i.e. ``T = (1 + alpha)^3 t`` in the Gaussian factor."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return ((4.0 + eps) / 4.0) ** 0.25 - 1.0


def traced_C5_C6(params: CDParams, eps: float) -> tuple[float, float]:
    """Constants of the Gaussian upper bound obtained by following its proof."""
    p = _p(params)
    a = upper_bound_alpha(eps)
    b = 1.0 + a
    C5 = b**p.D * math.exp(p.D * (a + 2.0) / (4.0 * a * b * p.d)) \
        * math.exp(1.0 / (4.0 * (b**3 - b**2)) + 1.0 / (4.0 * a * b**3))
    C6 = (2.0 + a) * (1.0 / (6.0 * a) + p.d * a / 4.0)
    return C5, C6


def kernel_upper_bound(params: CDParams, eps: float, vol_x: float, vol_y: float, dist: float, t: float, C5: float,
                       C6: float) -> float:
    """``C5 / sqrt(mu(B(x,sqrt t)) mu(B(y,sqrt t))) exp(C6 rho1^- t) exp(-d^2 / ((4+eps) t))``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if not t > 0:
        raise ValueError("time must be positive")
    if not (vol_x > 0 and vol_y > 0):
        raise ValueError("volumes must be positive")
    p = _p(params)
    return C5 / math.sqrt(vol_x * vol_y) * math.exp(C6 * p.rho1_minus * t) * math.exp(-dist * dist / ((4.0 + eps) * t))


def fit_C5(params: CDParams, eps: float, C6: float, samples) -> float:
    """Smallest ``C5`` for which the upper bound holds on ``samples``.

    Each sample is a mapping with ``p, vol_x, vol_y, dist, t``.
    """
    p = _p(params)
    best = 0.0
    for s in samples:
        val = s["p"] * math.sqrt(s["vol_x"] * s["vol_y"]) * math.exp(s["dist"] ** 2 / ((4.0 + eps) * s["t"])) \
            * math.exp(-C6 * p.rho1_minus * s["t"])
        best = max(best, val)
    return best


# ---------------------------------------------------------------------------
# doubling and distance comparison
# ---------------------------------------------------------------------------


def doubling_traced_constant(params: CDParams, gf: GrowthFunctions, C_input: float, R: float) -> float:
    """``C 2^(D/2+2) exp(25/2 d rho1^- R^2) A(R)^(-D/2)``."""
    p = _p(params)
    return C_input * 2.0 ** (p.D / 2.0 + 2.0) * math.exp(12.5 * p.d * p.rho1_minus * R * R) * gf.A(R) ** (-p.D / 2.0)


@dataclass
class Verdict:
    lhs: float
    rhs: float
    residual: float
    stderr: float | None
    verdict: str


def decide(residual: float, stderr: float | None, tol: float, k: float = 3.0) -> str:
    """``fail`` only when the residual is below ``-tol`` by more than ``k`` stderr."""
    if residual >= -tol:
        return "pass"
    if stderr is not None and stderr > 0 and residual + k * stderr >= -tol:
        return "inconclusive"
    return "fail"


def doubling_check(params: CDParams, vol_r: float, vol_2r: float, R: float, C3: float, C4: float,
                   stderr_r: float = 0.0, stderr_2r: float = 0.0, tol: float = 0.0) -> Verdict:
    """``mu(B(x, 2R)) <= C3 exp(C4 rho1^- R^2) mu(B(x, R))``."""
    p = _p(params)
    factor = C3 * math.exp(C4 * p.rho1_minus * R * R)
    rhs = factor * vol_r
    residual = rhs - vol_2r
    se = math.hypot(stderr_2r, factor * stderr_r)
    return Verdict(vol_2r, rhs, residual, se, decide(residual, se, tol))


def comparison_ratio(d: float, d_tau: float) -> float:
    """``d / max(sqrt(d_tau), d_tau)``."""
    m = max(math.sqrt(d_tau), d_tau)
    return 0.0 if m == 0 and d == 0 else d / m


def distance_comparison_bound(params: CDParams, C7: float, d_tau: float) -> float:
    p = _p(params)
    return C7 * (1.0 + math.sqrt(p.rho1_minus)) * max(math.sqrt(d_tau), d_tau)


# ---------------------------------------------------------------------------
# reverse log-Sobolev and reverse Harnack
# ---------------------------------------------------------------------------


def reverse_logsob_residual(P: float, gamma: float, gamma_Z: float, LP: float, entropy: float, params: CDParams,
                            C: float, delta: float, t: float) -> float:
    """RHS - LHS of the reverse log-Sobolev inequality.

    ``entropy`` is ``P_t(f ln f) - P_t f ln P_t f``; ``gamma`` and ``gamma_Z``
    are evaluated on ``ln P_t f``.
    """
    if C < 0:
        raise ValueError("C must be nonnegative")
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not t > 0:
        raise ValueError("time must be positive")
    if not P > 0:
        raise ValueError("P_t f must be positive")
    p = _p(params)
    lhs = t / p.rho2 * P * gamma + t * t * P * gamma_Z
    rhs = (1.0 / p.rho2) * (1.0 + 2.0 * p.kappa / p.rho2 + 4.0 * C / p.d + 2.0 * t * p.rho1_minus) * entropy \
        - 4.0 * C / (p.d * p.rho2) * t / (1.0 + delta) * LP \
        + 2.0 * C * C / (p.d * p.rho2) * math.log(1.0 + 1.0 / delta) * P
    return rhs - lhs


def reverse_harnack_residual(u: float, u_t: float, params: CDParams, t: float) -> float:
    """``2 t u_t + (u + (1 + c) u^(1/3) + c u^(-1/3)) (1 + sqrt(d rho1^- t))`` with ``c = sqrt(D*/2)``."""
    if not u > 0:
        raise ValueError("u must be positive (P_t f < 1)")
    p = _p(params)
    c = math.sqrt(p.Dstar / 2.0)
    return 2.0 * t * u_t + (u + (1.0 + c) * u ** (1.0 / 3.0) + c * u ** (-1.0 / 3.0)) \
        * (1.0 + math.sqrt(p.d * p.rho1_minus * t))


def reverse_harnack_residual_g(u: float, u_t: float, gf: GrowthFunctions, t: float) -> float:
    """The same quantity written as ``2 t u_t + (1 + sqrt(t d rho1^-)) / g(u)``."""
    p = _p(gf.params)
    return 2.0 * t * u_t + (1.0 + math.sqrt(t * p.d * p.rho1_minus)) / float(gf.g(u))


# ---------------------------------------------------------------------------
# kernel-level Harnack comparison on the first Heisenberg group
# ---------------------------------------------------------------------------


def harnack_check(x, y, z, s: float, t: float, tau: float, params: CDParams, reading: str = "yz",
                  tol: float = 1e-8) -> Verdict:
    """``p(x, y, s) <= harnack_rhs(dist) p(x, z, t)`` with kernel quadrature.

    ``reading="yz"`` uses ``d_tau(y, z)``, ``reading="xy"`` uses ``d_tau(x, y)``.
    ``s = t`` is accepted: the bound is 1 when the distance vanishes and
    infinite otherwise.  ``tol`` is relative to the right-hand side.
    """
    from .heat import h1_kernel
    from .metrics import _H1, d_tau

    if reading not in ("yz", "xy"):
        raise ValueError(f"unknown reading {reading!r}")
    if not 0 < s <= t:
        raise ValueError(f"need 0 < s <= t, got s={s}, t={t}")
    x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
    a, b = (y, z) if reading == "yz" else (x, y)
    dist = 0.0 if np.array_equal(a, b) else d_tau(_H1, a, b, tau).length
    pts = _H1.mul(_H1.inv(np.vstack([y, z])), np.vstack([x, x]))
    p_s, p_t = h1_kernel(pts, np.array([s, t]))
    if not (p_s > 0 and p_t > 0):
        raise ArithmeticError("kernel underflow")
    lhs = float(p_s / p_t)
    if s == t:
        rhs = 1.0 if dist == 0 else math.inf
    else:
        rhs = harnack_rhs(params, tau, dist, s, t)
    residual = rhs - lhs
    return Verdict(lhs, rhs, residual, None, decide(residual, None, tol * rhs if math.isfinite(rhs) else 0.0))
