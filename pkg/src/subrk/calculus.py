"""Carre-du-champ calculus on polynomial fields and the generalized CD check.

All forms are computed as exact polynomials from the frame, so identities such
as ``gamma(f, g) == sum_i (X_i f)(X_i g)`` are checked with ``==``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .polynomial import Polynomial, VectorField


class Unbounded:
    """Sentinel for "no constraint": the best admissible constant is +infinity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNBOUNDED"

    def __reduce__(self):
        return (Unbounded, ())


UNBOUNDED = Unbounded()


@dataclass(frozen=True)
class CDParams:
    """Parameters of CD(rho1, rho2, kappa, d).

    ``source`` records where the numbers come from: ``"model-space"`` for the
    closed-form values of Sasakian model spaces, ``"estimate"`` for values computed from
    Carnot structure constants, ``"explicit"`` for user input.
    """

    rho1: float
    rho2: float
    kappa: float
    d: float
    source: str = field(default="explicit", compare=False)

    def __post_init__(self):
        if not self.rho2 > 0:
            raise ValueError(f"rho2 must be positive, got {self.rho2}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")
        if not self.d > 0:
            raise ValueError(f"d must be positive, got {self.d}")

    @property
    def rho1_minus(self):
        return max(-self.rho1, 0)

    @property
    def D(self):
        return self.d * (1 + 3 * self.kappa / (2 * self.rho2))

    @property
    def Dstar(self):
        return self.d * (1 + 2 * self.kappa / self.rho2)

    def as_floats(self) -> "CDParams":
        return CDParams(float(self.rho1), float(self.rho2), float(self.kappa), float(self.d), self.source)

    def to_dict(self) -> dict:
        return {
            "rho1": float(self.rho1),
            "rho2": float(self.rho2),
            "kappa": float(self.kappa),
            "d": float(self.d),
            "source": self.source,
        }


class SubLaplacian:
    """``L = sum_i X_i^2`` for a horizontal frame of polynomial vector fields."""

    def __init__(self, horizontal: Iterable[VectorField]):
        self.horizontal = tuple(horizontal)
        if not self.horizontal:
            raise ValueError("empty horizontal frame")
        n = self.horizontal[0].nvars
        if any(X.nvars != n for X in self.horizontal):
            raise ValueError("frame fields act on different coordinate counts")
        self.nvars = n

    def __call__(self, f: Polynomial) -> Polynomial:
        self._check(f)
        out = Polynomial.zero(self.nvars)
        for X in self.horizontal:
            out = out + X(X(f))
        return out

    def _check(self, f: Polynomial) -> None:
        if f.nvars != self.nvars:
            raise ValueError(f"dimension mismatch: operator on {self.nvars} coordinates, polynomial in {f.nvars}")


def gamma(L: SubLaplacian, f: Polynomial, g: Polynomial) -> Polynomial:
    """Carre du champ ``(L(fg) - f Lg - g Lf) / 2``."""
    L._check(f)
    L._check(g)
    return (L(f * g) - f * L(g) - g * L(f)) * Fraction(1, 2)


def gamma_sos(L: SubLaplacian, f: Polynomial, g: Polynomial) -> Polynomial:
    """``sum_i (X_i f)(X_i g)``; equal to :func:`gamma` for a sum-of-squares operator."""
    L._check(f)
    L._check(g)
    out = Polynomial.zero(L.nvars)
    for X in L.horizontal:
        out = out + X(f) * X(g)
    return out


def gamma_Z(Z: Sequence[VectorField], f: Polynomial, g: Polynomial) -> Polynomial:
    if not Z:
        raise ValueError("vertical frame must be nonempty")
    n = Z[0].nvars
    if f.nvars != n or g.nvars != n:
        raise ValueError(f"dimension mismatch: vertical frame on {n} coordinates")
    out = Polynomial.zero(n)
    for Zk in Z:
        out = out + Zk(f) * Zk(g)
    return out


def gamma2(L: SubLaplacian, f: Polynomial) -> Polynomial:
    Lf = L(f)
    return (L(gamma(L, f, f)) - gamma(L, f, Lf) * 2) * Fraction(1, 2)


def gamma2_Z(L: SubLaplacian, Z: Sequence[VectorField], f: Polynomial) -> Polynomial:
    Lf = L(f)
    return (L(gamma_Z(Z, f, f)) - gamma_Z(Z, f, Lf) * 2) * Fraction(1, 2)


@dataclass(frozen=True)
class CDForms:
    """The five polynomial fields entering the CD inequality for one test function."""

    gamma: Polynomial
    gamma_Z: Polynomial
    gamma2: Polynomial
    gamma2_Z: Polynomial
    Lf: Polynomial

    def at(self, point) -> tuple:
        return tuple(p.evaluate(point) for p in (self.gamma, self.gamma_Z, self.gamma2, self.gamma2_Z, self.Lf))


def cd_forms(L: SubLaplacian, Z: Sequence[VectorField], f: Polynomial) -> CDForms:
    Lf = L(f)
    G = gamma_sos(L, f, f)
    GZ = gamma_Z(Z, f, f)
    G2 = (L(G) - gamma_sos(L, f, Lf) * 2) * Fraction(1, 2)
    G2Z = (L(GZ) - gamma_Z(Z, f, Lf) * 2) * Fraction(1, 2)
    return CDForms(G, GZ, G2, G2Z, Lf)


def _residual_from_values(values, params: CDParams, nu):
    G, GZ, G2, G2Z, Lf = values
    base = G2 - Lf * Lf / params.d - params.rho1 * G - params.rho2 * GZ
    if nu == math.inf:
        # residual = base + nu*G2Z + kappa*G/nu, so the limit is +inf unless G2Z vanishes
        if G2Z > 0:
            return math.inf
        return base
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    return base + nu * G2Z + params.kappa * G / nu


def cd_residual(frames, params: CDParams, f: Polynomial, point: Sequence, nu) -> object:
    """LHS - RHS of the CD inequality at ``point``; ``>= 0`` iff it holds there.

    ``frames`` is any object with ``sublaplacian`` and ``vertical`` attributes
    (a :class:`~subrk.models.CarnotModel`) or a ``(L, Z)`` pair.  ``nu`` may be
    ``math.inf`` for the analytic large-``nu`` limit.
    """
    if not (nu == math.inf or nu > 0):
        raise ValueError(f"nu must be positive, got {nu}")
    L, Z = _unpack(frames)
    return _residual_from_values(cd_forms(L, Z, f).at(point), params, nu)


def _unpack(frames):
    if isinstance(frames, tuple):
        return frames
    return frames.sublaplacian, frames.vertical


def default_nu_grid(n: int = 25, lo: float = 1e-3, hi: float = 1e3, exact: bool = True) -> list:
    """``n`` log-spaced values in ``[lo, hi]`` followed by ``inf``."""
    vals = [lo * (hi / lo) ** (k / (n - 1)) for k in range(n)]
    if exact:
        vals = [Fraction(v) for v in vals]
    return vals + [math.inf]


@dataclass
class CDSample:
    f: Polynomial
    points: Sequence[Sequence]
    nus: Sequence = field(default_factory=default_nu_grid)


def _best_rho1_at(values, rho2, kappa, d, nu):
    G, GZ, G2, G2Z, Lf = values
    # residual(rho1) = rest - rho1 * G  with G >= 0
    rest = G2 - Lf * Lf / d - rho2 * GZ
    if nu == math.inf:
        if G2Z > 0:
            return UNBOUNDED
    else:
        rest = rest + nu * G2Z + kappa * G / nu
    if G > 0:
        return rest / G
    return UNBOUNDED if rest >= 0 else -math.inf


def cd_best_rho1(frames, rho2, kappa, d, samples: Sequence[CDSample]):
    """Infimum over samples of the largest rho1 keeping the CD residual nonnegative.

    Returns :data:`UNBOUNDED` when no sample constrains rho1.  Since the
    samples are finite, the value is an upper bound on the true best constant.
    """
    if not samples:
        raise ValueError("empty sample specification")
    L, Z = _unpack(frames)
    best = UNBOUNDED
    for s in samples:
        if not s.points or not s.nus:
            raise ValueError("each sample needs at least one point and one nu")
        vals_at = [cd_forms(L, Z, s.f).at(p) for p in s.points]
        for vals in vals_at:
            for nu in s.nus:
                b = _best_rho1_at(vals, rho2, kappa, d, nu)
                if b is UNBOUNDED:
                    continue
                if best is UNBOUNDED or b < best:
                    best = b
    return best


def hypothesis_h2_residual(frames, f: Polynomial) -> Polynomial:
    """``Gamma(f, Gamma^Z(f)) - Gamma^Z(f, Gamma(f))``."""
    L, Z = _unpack(frames)
    return gamma(L, f, gamma_Z(Z, f, f)) - gamma_Z(Z, f, gamma(L, f, f))


@dataclass
class CDSweep:
    """Outcome of :func:`cd_sweep`."""

    n_checks: int
    n_failures: int
    min_residual: object
    worst: dict | None


def cd_sweep(frames, params: CDParams, polys: Iterable[Polynomial], points: Sequence[Sequence],
             nus: Sequence | None = None, tol=0) -> CDSweep:
    """Evaluate the CD residual over ``polys x points x nus`` and count violations."""
    L, Z = _unpack(frames)
    nus = default_nu_grid() if nus is None else nus
    n = fails = 0
    worst = None
    min_res = math.inf
    for i, f in enumerate(polys):
        forms = cd_forms(L, Z, f)
        for j, p in enumerate(points):
            vals = forms.at(p)
            for nu in nus:
                r = _residual_from_values(vals, params, nu)
                n += 1
                if r < min_res:
                    min_res = r
                    worst = {"poly": i, "point": j, "nu": nu, "residual": r}
                if r < -tol:
                    fails += 1
    return CDSweep(n, fails, min_res, worst)
