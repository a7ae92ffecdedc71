"""Lie-algebra layer: elements, brackets, hulls and coefficient maps T^n -> g."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np
import sympy

from .scalars import QI
from .spectral import GroupSpec
from .trig import TrigPoly

__all__ = [
    "ZeroMapError",
    "LieElement",
    "CoefficientMap",
    "SystemSpec",
    "RangeBasis",
    "AlphaDelta",
    "bracket",
    "lie_hull",
    "range_basis",
    "commutativity_check",
    "D_value",
    "estimate_alpha_delta",
    "check_structure_constants",
]

FLOAT_RANK_TOL = 1e-10


class ZeroMapError(ValueError):
    """A coefficient map that vanishes identically where a nonzero one is required."""


def _exact_coord(c):
    if isinstance(c, Rational):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    return None


@dataclass(frozen=True)
class LieElement:
    """Element of g in the orthonormal basis X_1..X_m of the group backend."""

    group: GroupSpec
    coords: tuple

    def __post_init__(self):
        if len(self.coords) != self.group.m:
            raise ValueError(f"{self.group} needs {self.group.m} coordinates, got {len(self.coords)}")
        exact = [_exact_coord(c) for c in self.coords]
        if all(e is not None for e in exact):
            object.__setattr__(self, "coords", tuple(exact))
        else:
            object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))

    @classmethod
    def basis(cls, group: GroupSpec, k: int) -> "LieElement":
        """The k-th basis vector, 1-based like X_1..X_m."""
        return cls(group, tuple(1 if i == k - 1 else 0 for i in range(group.m)))

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coords)

    def norm(self) -> float:
        return math.sqrt(sum(float(c) ** 2 for c in self.coords))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __add__(self, other):
        _same_group(self, other)
        return LieElement(self.group, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        _same_group(self, other)
        return LieElement(self.group, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __mul__(self, s):
        return LieElement(self.group, tuple(c * s for c in self.coords))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def as_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.coords])


def _same_group(x: LieElement, y: LieElement):
    if x.group != y.group:
        raise ValueError(f"elements of different Lie algebras: {x.group} vs {y.group}")


def bracket(X: LieElement, Y: LieElement) -> LieElement:
    """[X, Y]; zero on tori, the cross product in the su(2) basis ([X1, X2] = X3)."""
    _same_group(X, Y)
    if X.group.abelian:
        return LieElement(X.group, (0,) * X.group.m)
    a, b = X.coords, Y.coords
    return LieElement(X.group, (a[1] * b[2] - a[2] * b[1],
                                a[2] * b[0] - a[0] * b[2],
                                a[0] * b[1] - a[1] * b[0]))


def check_structure_constants(group: GroupSpec) -> None:
    """Raise if antisymmetry or the Jacobi identity fails on basis triples."""
    basis = [LieElement.basis(group, k) for k in range(1, group.m + 1)]
    for x in basis:
        for y in basis:
            if not (bracket(x, y) + bracket(y, x)).is_zero():
                raise AssertionError("bracket is not antisymmetric")
            for z in basis:
                jac = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y))
                if not jac.is_zero():
                    raise AssertionError("Jacobi identity fails")


# linear algebra on coordinate vectors ------------------------------------

def _rank(rows: list[tuple], exact: bool) -> int:
    if not rows:
        return 0
    if exact:
        return sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in r] for r in rows]).rank()
    a = np.array([[float(c) for c in r] for r in rows])
    if not a.size:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int((s > FLOAT_RANK_TOL * max(1.0, s[0])).sum())


def _independent(vectors: list[LieElement]) -> list[LieElement]:
    """Greedy independent subset, in input order."""
    keep: list[LieElement] = []
    exact = all(v.exact for v in vectors)
    for v in vectors:
        if _rank([w.coords for w in keep + [v]], exact) > len(keep):
            keep.append(v)
    return keep


def _orthonormalize(vectors: list[LieElement]) -> tuple[LieElement, ...]:
    if not vectors:
        return ()
    group = vectors[0].group
    a = np.array([v.as_float() for v in vectors]).T
    q, _ = np.linalg.qr(a)
    q = q[:, : len(vectors)]
    out = []
    for col in q.T:
        k = int(np.argmax(np.abs(col) > 1e-12))  # sign convention: first nonzero entry positive
        if col[k] < 0:
            col = -col
        out.append(LieElement(group, tuple(float(c) for c in col)))
    return tuple(out)


def lie_hull(S: Sequence[LieElement]) -> tuple[LieElement, ...]:
    """Orthonormal basis of the smallest bracket-closed subspace containing S."""
    S = [s for s in S]
    if not S:
        raise ValueError("lie_hull needs a non-empty set")
    basis = _independent([s for s in S if not s.is_zero()])
    while True:
        brackets = [bracket(x, y) for i, x in enumerate(basis) for y in basis[i + 1:]]
        grown = _independent(basis + [b for b in brackets if not b.is_zero()])
        if len(grown) == len(basis):
            break
        basis = grown
    return _orthonormalize(basis)


# coefficient maps ----------------------------------------------------------

@dataclass(frozen=True)
class CoefficientMap:
    """Smooth map a: T^n -> g, one real trig polynomial per basis direction."""

    group: GroupSpec
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != self.group.m:
            raise ValueError(f"{self.group} needs {self.group.m} components, got {len(comps)}")
        ns = {c.n for c in comps}
        if len(ns) != 1:
            raise ValueError("components live on tori of different dimensions")
        if len({c.exact for c in comps}) != 1:
            raise TypeError("components mix exact and floating coefficients")
        for j, c in enumerate(comps):
            if not c.is_real():
                raise ValueError(f"component {j + 1} is not conjugate-symmetric (not real-valued)")
        object.__setattr__(self, "components", comps)

    @classmethod
    def constant(cls, group: GroupSpec, n: int, vector) -> "CoefficientMap":
        vec = list(vector.coords if isinstance(vector, LieElement) else vector)
        exact = all(_exact_coord(v) is not None for v in vec)
        comps = tuple(TrigPoly.constant(n, _exact_coord(v) if exact else float(v), exact) for v in vec)
        return cls(group, comps)

    @classmethod
    def line(cls, poly: TrigPoly, X: LieElement) -> "CoefficientMap":
        """``a(t) = poly(t) * X``."""
        comps = tuple(poly * (c if poly.exact else float(c)) for c in X.coords)
        return cls(X.group, comps)

    @property
    def n(self) -> int:
        return self.components[0].n

    @property
    def exact(self) -> bool:
        return self.components[0].exact

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def is_constant(self) -> bool:
        return all(c.is_constant() for c in self.components)

    def bandwidth(self) -> int:
        return max(c.bandwidth() for c in self.components)

    def __call__(self, t) -> np.ndarray:
        return np.array([c(t).real for c in self.components])

    def constant_value(self) -> LieElement:
        if not self.is_constant():
            raise ValueError("map is not constant")
        vals = []
        for c in self.components:
            v = c.constant_term()
            vals.append(v.re if isinstance(v, QI) else float(complex(v).real))
        return LieElement(self.group, tuple(vals))

    def to_float(self) -> "CoefficientMap":
        return CoefficientMap(self.group, tuple(c.to_float() for c in self.components))


@dataclass(frozen=True)
class SystemSpec:
    """The system generated by the ranges of a_1..a_N."""

    maps: tuple
    allow_zero: bool = False

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("a system needs at least one coefficient map")
        if len({m.group for m in maps}) != 1:
            raise ValueError("coefficient maps over different groups")
        if not self.allow_zero:
            for i, m in enumerate(maps):
                if m.is_zero():
                    raise ZeroMapError(f"coefficient map {i + 1} vanishes identically")
        object.__setattr__(self, "maps", maps)

    @classmethod
    def constant(cls, group: GroupSpec, vectors, n: int = 1) -> "SystemSpec":
        return cls(tuple(CoefficientMap.constant(group, n, v) for v in vectors))

    @property
    def group(self) -> GroupSpec:
        return self.maps[0].group

    def generators(self) -> list[LieElement]:
        """All range-basis elements L_p^l, in order (l, p)."""
        out = []
        for m in self.maps:
            if m.is_zero():
                continue
            out.extend(range_basis(m).basis)
        return out


@dataclass(frozen=True)
class RangeBasis:
    """Basis L_1..L_m' of span(ran a) with a(t) = sum_p alpha_p(t) L_p.

    ``pivots`` are the indices j_p (0-based) of the linearly independent
    coefficient functions, ``others`` the remaining indices i_q, and
    ``coefficients[q][p]`` the constant with a_{i_q} = sum_p c_qp a_{j_p}.
    """

    basis: tuple
    alphas: tuple
    pivots: tuple
    others: tuple
    coefficients: tuple = field(repr=False)

    @property
    def rank(self) -> int:
        return len(self.basis)


def _gram(comps, exact):
    m = len(comps)
    g = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            v = comps[i].inner(comps[j])
            g[i][j] = v.re if exact else float(v.real)
    return g


def range_basis(a: CoefficientMap) -> RangeBasis:
    """Pivot basis of the range span, decided on the exact L^2 Gram matrix."""
    if a.is_zero():
        raise ZeroMapError("range_basis of an identically zero map")
    comps = a.components
    exact = a.exact
    gram = _gram(comps, exact)
    m = len(comps)
    pivots: list[int] = []
    for j in range(m):
        trial = pivots + [j]
        sub = [tuple(gram[r][c] for c in trial) for r in trial]
        if _rank(sub, exact) > len(pivots):
            pivots.append(j)
    others = [j for j in range(m) if j not in pivots]
    coeffs = []
    if others:
        if exact:
            gjj = sympy.Matrix([[sympy.Rational(gram[r][c].numerator, gram[r][c].denominator) for c in pivots]
                                for r in pivots])
            inv = gjj.inv()
            for i in others:
                rhs = sympy.Matrix([sympy.Rational(gram[r][i].numerator, gram[r][i].denominator) for r in pivots])
                sol = inv * rhs
                coeffs.append(tuple(Fraction(int(s.p), int(s.q)) for s in sol))
        else:
            gjj = np.array([[gram[r][c] for c in pivots] for r in pivots])
            for i in others:
                rhs = np.array([gram[r][i] for r in pivots])
                coeffs.append(tuple(float(x) for x in np.linalg.solve(gjj, rhs)))
    basis = []
    for p, jp in enumerate(pivots):
        v = [0] * m if exact else [0.0] * m
        v[jp] = 1
        for q, iq in enumerate(others):
            v[iq] = coeffs[q][p]
        basis.append(LieElement(a.group, tuple(v)))
    alphas = tuple(comps[j] for j in pivots)
    return RangeBasis(tuple(basis), alphas, tuple(pivots), tuple(others), tuple(coeffs))


def commutativity_check(a: CoefficientMap, tol: float = 1e-12) -> bool:
    """True iff the range of a spans a commutative subalgebra."""
    if a.group.abelian:
        return True
    basis = range_basis(a).basis
    for i, x in enumerate(basis):
        for y in basis[i + 1:]:
            b = bracket(x, y)
            if b.exact:
                if not b.is_zero():
                    return False
            elif b.norm() > tol:
                return False
    return True


def D_value(a: CoefficientMap, t, gamma) -> float:
    """(sum_p alpha_p(t) gamma_p)^2."""
    rb = range_basis(a)
    gamma = list(gamma)
    if len(gamma) != rb.rank:
        raise ValueError(f"gamma has length {len(gamma)}, range rank is {rb.rank}")
    s = sum(alpha(t).real * float(g) for alpha, g in zip(rb.alphas, gamma))
    return s * s


@dataclass(frozen=True)
class AlphaDelta:
    alpha: float
    delta: float
    per_gamma_measure: tuple = field(repr=False)
    gammas: np.ndarray = field(repr=False)
    seed: int = 0


def _t_grid(n: int, resolution: int) -> np.ndarray:
    axis = 2 * np.pi * np.arange(resolution) / resolution
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def estimate_alpha_delta(a: CoefficientMap, gamma_samples: int = 64, t_grid: int = 256,
                         alpha=None, delta_floor: float = 0.1, thresholds: int = 64,
                         seed: int = 0) -> AlphaDelta:
    """Empirical (alpha, delta) for the superlevel sets {t : D(t, gamma) > alpha}.

    Measures are fractions of a uniform grid on T^n; gammas are drawn on the
    unit sphere with ``numpy.random.default_rng(seed)``.  With ``alpha``
    given, returns the smallest measure over the sampled gammas.  Otherwise
    the largest threshold ``k/thresholds * max D`` whose smallest measure is
    at least ``delta_floor`` is selected.
    """
    if gamma_samples < 1 or t_grid < 1:
        raise ValueError("sample counts must be positive")
    rb = range_basis(a)
    pts = _t_grid(a.n, t_grid)
    alphas = np.stack([p.evaluate_grid(pts).real for p in rb.alphas])  # (m', N)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((gamma_samples, rb.rank))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    D = (g @ alphas) ** 2  # (gammas, N)

    def worst_measure(level):
        meas = (D > level).mean(axis=1)
        return float(meas.min()), tuple(float(x) for x in meas)

    if alpha is not None:
        delta, per = worst_measure(float(alpha))
        return AlphaDelta(float(alpha), delta, per, g, seed)
    top = float(D.max())
    best = None
    for k in range(thresholds - 1, 0, -1):
        level = top * k / thresholds
        delta, per = worst_measure(level)
        if delta >= delta_floor:
            best = AlphaDelta(level, delta, per, g, seed)
            break
    if best is None:
        delta, per = worst_measure(0.0)
        best = AlphaDelta(0.0, delta, per, g, seed)
    return best
