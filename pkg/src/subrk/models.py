"""Step-two Carnot groups: frames, group law, dilations and CD parameters.

Coordinates are flat: a point of a group with horizontal dimension ``d`` and
vertical dimension ``m`` is a length ``d + m`` sequence ``(x_1..x_d, z_1..z_m)``.
The group law is

    (x, z) * (x', z') = (x + x', z + z' + 1/2 <B x, x'>)

with ``<B x, x'>_k = sum_ij B^k_ij x_i x'_j``.  The left-invariant frame is

    X_i = d/dx_i + 1/2 sum_k (sum_j B^k_ji x_j) d/dz_k,      Z_k = d/dz_k,

so that ``[X_i, X_j] = sum_k B^k_ij Z_k``.  For the first Heisenberg group this
gives ``X = d/dx - (y/2) d/dz`` and ``Y = d/dy + (x/2) d/dz``.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .calculus import CDParams, SubLaplacian
from .polynomial import Polynomial, VectorField, coordinate_field


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    return Fraction(str(v)) if isinstance(v, str) else Fraction(float(v))


class CarnotModel:
    """Step-two Carnot group given by skew-symmetric structure matrices."""

    def __init__(self, structure: Sequence[Sequence[Sequence]], name: str | None = None):
        mats = tuple(tuple(tuple(_frac(v) for v in row) for row in B) for B in structure)
        if not mats:
            raise ValueError("need at least one structure matrix")
        d = len(mats[0])
        for B in mats:
            if len(B) != d or any(len(row) != d for row in B):
                raise ValueError("structure matrices must all be d x d")
            for i in range(d):
                for j in range(d):
                    if B[i][j] != -B[j][i]:
                        raise ValueError(f"structure matrix is not skew-symmetric at ({i}, {j})")
        self.structure = mats
        self.d = d
        self.m = len(mats)
        self.name = name or f"carnot2(d={d}, m={self.m})"

    @property
    def Q(self) -> int:
        """Homogeneous dimension ``d + 2m``."""
        return self.d + 2 * self.m

    @property
    def n(self) -> int:
        return self.d + self.m

    @cached_property
    def B(self) -> np.ndarray:
        """Structure constants as a float array of shape ``(m, d, d)``."""
        return np.array([[[float(v) for v in row] for row in Bk] for Bk in self.structure])

    def __repr__(self) -> str:
        return f"CarnotModel({self.name})"

    def __eq__(self, other) -> bool:
        return isinstance(other, CarnotModel) and self.structure == other.structure

    def __hash__(self) -> int:
        return hash(self.structure)

    # -- frames -----------------------------------------------------------
    @cached_property
    def horizontal(self) -> tuple[VectorField, ...]:
        n, d = self.n, self.d
        xs = Polynomial.variables(n)
        fields = []
        for i in range(d):
            coeffs = [Polynomial.constant(n, 1) if j == i else Polynomial.zero(n) for j in range(d)]
            for k, Bk in enumerate(self.structure):
                c = Polynomial.zero(n)
                for j in range(d):
                    if Bk[j][i]:
                        c = c + xs[j] * (Bk[j][i] / 2)
                coeffs.append(c)
            fields.append(VectorField(coeffs))
        return tuple(fields)

    @cached_property
    def vertical(self) -> tuple[VectorField, ...]:
        return tuple(coordinate_field(self.n, self.d + k) for k in range(self.m))

    @cached_property
    def sublaplacian(self) -> SubLaplacian:
        return SubLaplacian(self.horizontal)

    def frame_matrix(self, point: Sequence[float]) -> np.ndarray:
        """Columns are ``X_1..X_d, Z_1..Z_m`` evaluated at ``point``."""
        cols = [np.array([float(c) for c in X.evaluate(point)]) for X in self.horizontal]
        cols += [np.array([float(c) for c in Z.evaluate(point)]) for Z in self.vertical]
        return np.column_stack(cols)

    # -- group operations -------------------------------------------------
    def _omega(self, x, xp):
        return [
            sum((Bk[i][j] * x[i] * xp[j] for i in range(self.d) for j in range(self.d) if Bk[i][j]), 0)
            for Bk in self.structure
        ]

    def _check_point(self, p) -> None:
        if len(p) != self.n:
            raise ValueError(f"point has {len(p)} coordinates, model {self.name} needs {self.n}")

    def group_law(self, p: Sequence, q: Sequence) -> tuple:
        """Exact product for sequences of numbers, Fractions or Polynomials."""
        self._check_point(p)
        self._check_point(q)
        d = self.d
        w = self._omega(p[:d], q[:d])
        x = [a + b for a, b in zip(p[:d], q[:d])]
        z = [p[d + k] + q[d + k] + w[k] * Fraction(1, 2) for k in range(self.m)]
        return tuple(x + z)

    def inverse(self, p: Sequence) -> tuple:
        self._check_point(p)
        return tuple(-v for v in p)

    def identity(self) -> tuple:
        return (Fraction(0),) * self.n

    def dilation(self, lam, p: Sequence) -> tuple:
        if not lam > 0:
            raise ValueError(f"dilation factor must be positive, got {lam}")
        self._check_point(p)
        d = self.d
        return tuple([lam * v for v in p[:d]] + [lam * lam * v for v in p[d:]])

    # vectorised float versions used by the numerical modules
    def mul(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Batched group law on float arrays of shape ``(..., n)``."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        d = self.d
        w = np.einsum("kij,...i,...j->...k", self.B, p[..., :d], q[..., :d])
        out = np.empty(np.broadcast_shapes(p.shape, q.shape))
        out[..., :d] = p[..., :d] + q[..., :d]
        out[..., d:] = p[..., d:] + q[..., d:] + 0.5 * w
        return out

    def inv(self, p: np.ndarray) -> np.ndarray:
        return -np.asarray(p, dtype=float)

    def dil(self, lam: float, p: np.ndarray) -> np.ndarray:
        p = np.array(p, dtype=float)
        p[..., : self.d] *= lam
        p[..., self.d :] *= lam * lam
        return p

    def to_spec(self) -> dict:
        if self.name.startswith("heisenberg("):
            return {"type": "heisenberg", "n": self.d // 2}
        return {"type": "carnot2", "B": [[[float(v) for v in row] for row in Bk] for Bk in self.structure]}


def heisenberg(n: int = 1) -> CarnotModel:
    """Heisenberg group of dimension ``2n + 1`` with coordinates ``(x_1..x_n, y_1..y_n, z)``."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"Heisenberg index must be a positive integer, got {n}")
    d = 2 * n
    B = [[0] * d for _ in range(d)]
    for i in range(n):
        B[i][n + i] = 1
        B[n + i][i] = -1
    return CarnotModel([B], name=f"heisenberg({n})")


def random_carnot(d: int, m: int, seed: int = 0, coeff_range: int = 2) -> CarnotModel:
    """Random step-two group with integer structure constants.

    Redraws until the structure matrices are linearly independent, so the
    vertical layer is generated by brackets.
    """
    if d < 2 or m < 1 or m > d * (d - 1) // 2:
        raise ValueError(f"no step-two group with d={d}, m={m}")
    rng = random.Random(seed)
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    while True:
        mats = []
        for _ in range(m):
            B = [[0] * d for _ in range(d)]
            for i, j in pairs:
                v = rng.randint(-coeff_range, coeff_range)
                B[i][j], B[j][i] = v, -v
            mats.append(B)
        vecs = np.array([[B[i][j] for i, j in pairs] for B in mats], dtype=float)
        if np.linalg.matrix_rank(vecs) == m:
            return CarnotModel(mats, name=f"carnot2(d={d}, m={m}, seed={seed})")


@dataclass(frozen=True)
class SasakianSpec:
    """A Sasakian manifold represented only through its CD parameters."""

    n: int
    rho1: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("Sasakian dimension index must be >= 1")


def _snap(value: float, direction: int) -> Fraction:
    """Exact rational close to ``value``, rounded toward safety when it is irrational."""
    r = Fraction(value).limit_denominator(10**6)
    if abs(float(r) - value) < 1e-12:
        return r
    scale = 10**9
    return Fraction(math.floor(value * scale) if direction < 0 else math.ceil(value * scale), scale)


def cd_parameters(model: CarnotModel | SasakianSpec) -> CDParams:
    """CD parameters for a model space.

    Sasakian manifolds of dimension ``2n + 1`` with horizontal Ricci bound
    ``rho1`` satisfy CD(rho1, d/4, 1, d) with ``d = 2n``.  For a Carnot group
    the curvature parameter is 0 and ``rho2``, ``kappa`` are computed from the
    structure constants: the antisymmetric part of the horizontal Hessian
    contributes ``1/4 zeta^T G zeta`` with ``G_kl = sum_ij B^k_ij B^l_ij``, and
    the mixed term is bounded with ``lambda_max(sum_k B^k^T B^k)``.  These are
    estimates (flagged by ``source="estimate"``) to be certified by sampling.
    """
    if isinstance(model, SasakianSpec):
        d = 2 * model.n
        rho1 = model.rho1 if isinstance(model.rho1, (int, Fraction)) else _frac(model.rho1)
        return CDParams(rho1, Fraction(d, 4), 1, d, source="model-space")
    B = model.B
    gram = np.einsum("kij,lij->kl", B, B)
    mixed = np.einsum("kji,kjl->il", B, B)
    rho2 = 0.25 * float(np.linalg.eigvalsh(gram).min())
    kappa = float(np.linalg.eigvalsh(mixed).max())
    if rho2 <= 0:
        raise ValueError("structure matrices are linearly dependent; rho2 would vanish")
    return CDParams(0, _snap(rho2, -1), _snap(kappa, +1), model.d, source="estimate")


def load_model(spec: dict | str | Path) -> CarnotModel | SasakianSpec:
    """Build a model from its JSON description (a dict, a JSON string or a file path).

    Accepted forms::

        {"type": "heisenberg", "n": 1}
        {"type": "carnot2", "B": [[[...]], ...]}
        {"type": "sasakian", "n": 1, "rho1": -1.0}
    """
    if isinstance(spec, Path) or (isinstance(spec, str) and not spec.lstrip().startswith("{")):
        spec = json.loads(Path(spec).read_text())
    elif isinstance(spec, str):
        spec = json.loads(spec)
    kind = spec.get("type")
    if kind == "heisenberg":
        return heisenberg(int(spec.get("n", 1)))
    if kind == "carnot2":
        B = spec["B"]
        # a single d x d matrix is accepted as shorthand for m = 1
        if B and B[0] and not isinstance(B[0][0], list):
            B = [B]
        return CarnotModel(B)
    if kind == "random_carnot":
        return random_carnot(int(spec["d"]), int(spec["m"]), int(spec.get("seed", 0)))
    if kind == "sasakian":
        return SasakianSpec(int(spec["n"]), spec["rho1"])
    raise ValueError(f"unknown model type {kind!r}")
