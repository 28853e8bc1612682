"""Exact multivariate polynomials and first-order differential operators.

Coefficients are :class:`fractions.Fraction` by default so that every
carre-du-champ identity can be checked with ``==``.  Any numeric type that
supports ``+``, ``*`` and comparison with zero works as a coefficient, which
gives the float fallback used by large sweeps.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product
from numbers import Number
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

Monomial = tuple[int, ...]


def _coerce(c):
    if isinstance(c, bool):
        return Fraction(int(c))
    if isinstance(c, int):
        return Fraction(c)
    return c


class Polynomial:
    """Sparse polynomial in ``nvars`` variables, stored as ``{exponents: coeff}``.

    Zero coefficients are never stored.  Instances are immutable and hashable.
    """

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Monomial, object] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        clean: dict[Monomial, object] = {}
        for mono, c in (terms or {}).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != nvars:
                raise ValueError(f"monomial {mono} does not have {nvars} exponents")
            if any(e < 0 for e in mono):
                raise ValueError(f"negative exponent in {mono}")
            c = _coerce(c)
            if c != 0:
                clean[mono] = clean.get(mono, 0) + c
                if clean[mono] == 0:
                    del clean[mono]
        self.nvars = nvars
        self._terms = clean
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, nvars: int, c=1) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars)

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Polynomial":
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range for {nvars} variables")
        mono = [0] * nvars
        mono[i] = 1
        return cls(nvars, {tuple(mono): 1})

    @classmethod
    def variables(cls, nvars: int) -> tuple["Polynomial", ...]:
        return tuple(cls.variable(nvars, i) for i in range(nvars))

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> Mapping[Monomial, object]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(m) for m in self._terms), default=-1)

    def constant_term(self):
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, Number):
            return self == Polynomial.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        if not self._terms:
            return f"Polynomial({self.nvars}, 0)"
        parts = []
        for mono in sorted(self._terms, reverse=True):
            c = self._terms[mono]
            factors = [f"x{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(mono) if e]
            parts.append(f"{c}" + ("*" + "*".join(factors) if factors else ""))
        return f"Polynomial({self.nvars}, {' + '.join(parts)})"

    # -- arithmetic -------------------------------------------------------
    def _lift(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError(f"dimension mismatch: {self.nvars} vs {other.nvars} variables")
            return other
        if isinstance(other, Number):
            return Polynomial.constant(self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for mono, c in other._terms.items():
            out[mono] = out.get(mono, 0) + c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            c0 = _coerce(other)
            return Polynomial(self.nvars, {m: c * c0 for m, c in self._terms.items()})
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out: dict[Monomial, object] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = Polynomial.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- calculus ---------------------------------------------------------
    def diff(self, i: int) -> "Polynomial":
        """Partial derivative with respect to variable ``i``."""
        if not 0 <= i < self.nvars:
            raise IndexError(f"variable index {i} out of range")
        out = {}
        for mono, c in self._terms.items():
            e = mono[i]
            if e:
                m = list(mono)
                m[i] = e - 1
                out[tuple(m)] = c * e
        return Polynomial(self.nvars, out)

    def __call__(self, *point):
        return self.evaluate(point)

    def evaluate(self, point: Sequence):
        """Evaluate at ``point``; exact when the coordinates are rationals."""
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.nvars}")
        # cache powers per coordinate
        powers: list[dict[int, object]] = [{0: 1} for _ in range(self.nvars)]
        total = 0
        for mono, c in self._terms.items():
            term = c
            for i, e in enumerate(mono):
                if e:
                    cache = powers[i]
                    if e not in cache:
                        cache[e] = point[i] ** e
                    term = term * cache[e]
            total = total + term
        return total

    def compose(self, substitutions: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute polynomial ``substitutions[i]`` for variable ``i``."""
        if len(substitutions) != self.nvars:
            raise ValueError("need one substitution per variable")
        if not substitutions:
            return self
        target = substitutions[0].nvars
        result = Polynomial.zero(target)
        powers: list[dict[int, Polynomial]] = [{0: Polynomial.constant(target, 1)} for _ in substitutions]
        for mono, c in self._terms.items():
            term = Polynomial.constant(target, c)
            for i, e in enumerate(mono):
                if e:
                    if e not in powers[i]:
                        powers[i][e] = substitutions[i] ** e
                    term = term * powers[i][e]
            result = result + term
        return result

    def to_float(self) -> "Polynomial":
        return Polynomial(self.nvars, {m: float(c) for m, c in self._terms.items()})


class VectorField:
    """First-order operator ``sum_i a_i(x) d/dx_i`` with polynomial coefficients."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Iterable[Polynomial]):
        coeffs = tuple(coefficients)
        if not coeffs:
            raise ValueError("a vector field needs at least one coefficient")
        n = coeffs[0].nvars
        if any(c.nvars != n for c in coeffs) or len(coeffs) != n:
            raise ValueError("coefficients must be polynomials in as many variables as there are coefficients")
        self.coefficients = coeffs

    @property
    def nvars(self) -> int:
        return len(self.coefficients)

    def __call__(self, f: Polynomial) -> Polynomial:
        if f.nvars != self.nvars:
            raise ValueError(f"dimension mismatch: field on {self.nvars} coordinates, polynomial in {f.nvars}")
        out = Polynomial.zero(self.nvars)
        for i, a in enumerate(self.coefficients):
            if not a.is_zero():
                df = f.diff(i)
                if not df.is_zero():
                    out = out + a * df
        return out

    def bracket(self, other: "VectorField") -> "VectorField":
        """Lie bracket ``[self, other]``."""
        return VectorField(self(b) - other(a) for a, b in zip(self.coefficients, other.coefficients))

    def evaluate(self, point: Sequence) -> tuple:
        return tuple(a.evaluate(point) for a in self.coefficients)

    def __eq__(self, other) -> bool:
        return isinstance(other, VectorField) and self.coefficients == other.coefficients

    def __hash__(self) -> int:
        return hash(self.coefficients)

    def __repr__(self) -> str:
        return f"VectorField({list(self.coefficients)!r})"


def coordinate_field(nvars: int, i: int) -> VectorField:
    """The constant field ``d/dx_i``."""
    return VectorField(
        Polynomial.constant(nvars, 1) if j == i else Polynomial.zero(nvars) for j in range(nvars)
    )


def random_polynomial(
    nvars: int,
    max_degree: int = 4,
    rng: random.Random | None = None,
    coeff_range: int = 3,
    density: float = 1.0,
) -> Polynomial:
    """Random polynomial with integer coefficients uniform in ``[-coeff_range, coeff_range]``.

    Every monomial of total degree ``<= max_degree`` is kept with probability
    ``density``.
    """
    rng = rng or random.Random(0)
    terms = {}
    for mono in product(range(max_degree + 1), repeat=nvars):
        if sum(mono) <= max_degree and rng.random() < density:
            terms[mono] = rng.randint(-coeff_range, coeff_range)
    return Polynomial(nvars, terms)
