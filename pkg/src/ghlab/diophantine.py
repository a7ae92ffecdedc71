"""Exact arithmetic for the non-simultaneous approximability conditions on T^m.

Every pass/fail decision is made either on exact rationals or on rigorous
interval enclosures; floating point is only used to rank points and to
discard those that are far from the decision boundary by a certified margin.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational as _NumRational
from typing import Iterable, Sequence

import mpmath
import numpy as np

from ._parallel import pmap
from .spectral import lattice_points

__all__ = [
    "PrecisionExhausted",
    "RealSpec",
    "Rational",
    "QuadraticSurd",
    "LiouvilleSeries",
    "DecimalLiteral",
    "Affine",
    "as_real",
    "ContinuedFraction",
    "continued_fraction",
    "NsaBlock",
    "NsaFamily",
    "ConditionResult",
    "NsaVerdict",
    "check_condition_G",
    "check_condition_I",
    "verify_equivalence",
    "LiouvilleWitness",
    "liouville_witnesses",
    "convergent_candidates",
]


class PrecisionExhausted(ArithmeticError):
    """An enclosure could not be made tight enough to decide a question."""


# ---------------------------------------------------------------------------
# real numbers with rational enclosures
# ---------------------------------------------------------------------------

class RealSpec:
    """A real number that can be enclosed in rational intervals of any width."""

    def enclosure(self, eps) -> tuple[Fraction, Fraction]:
        raise NotImplementedError

    def exact(self):
        """Fraction, ``(a, b, d)`` for a + b*sqrt(d), or None if unknown."""
        return None

    def __float__(self):
        lo, hi = self.enclosure(Fraction(1, 10 ** 20))
        return float((lo + hi) / 2)

    def approx(self, eps) -> Fraction:
        lo, hi = self.enclosure(eps)
        return (lo + hi) / 2

    @property
    def is_rational(self) -> bool:
        return isinstance(self.exact(), Fraction)


@dataclass(frozen=True)
class Rational(RealSpec):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    def enclosure(self, eps):
        return self.value, self.value

    def exact(self):
        return self.value

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class QuadraticSurd(RealSpec):
    """a + b*sqrt(d) with rational a, b and a positive integer d."""

    a: Fraction
    b: Fraction
    d: int

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.d < 0:
            raise ValueError("surd radicand must be non-negative")
        r = math.isqrt(self.d)
        if r * r == self.d:  # collapse perfect squares to rationals
            object.__setattr__(self, "a", self.a + self.b * r)
            object.__setattr__(self, "b", Fraction(0))
            object.__setattr__(self, "d", 0)

    @classmethod
    def golden(cls) -> "QuadraticSurd":
        return cls(Fraction(1, 2), Fraction(1, 2), 5)

    def exact(self):
        if self.b == 0 or self.d == 0:
            return self.a
        return (self.a, self.b, self.d)

    def enclosure(self, eps):
        eps = Fraction(eps)
        if self.b == 0 or self.d == 0:
            return self.a, self.a
        scale = 1
        while Fraction(abs(self.b), scale) > eps:
            scale *= 16
        s = math.isqrt(self.d * scale * scale)  # s/scale <= sqrt(d) < (s+1)/scale
        lo_r, hi_r = Fraction(s, scale), Fraction(s + 1, scale)
        if self.b > 0:
            return self.a + self.b * lo_r, self.a + self.b * hi_r
        return self.a + self.b * hi_r, self.a + self.b * lo_r


@dataclass(frozen=True)
class LiouvilleSeries(RealSpec):
    """sum_{n >= 1} base^(-n!).

    ``truncation`` caps the partial-sum order used for enclosures; asking for a
    tighter enclosure than order ``truncation`` can deliver raises
    PrecisionExhausted.
    """

    base: int = 10
    truncation: int = 9

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("Liouville base must be >= 2")

    def partial_sum(self, k: int) -> Fraction:
        q = self.base ** math.factorial(k)
        p = sum(self.base ** (math.factorial(k) - math.factorial(n)) for n in range(1, k + 1))
        return Fraction(p, q)

    def tail_bound(self, k: int) -> Fraction:
        """Upper bound 2*base^-(k+1)! for the tail after order k."""
        return Fraction(2, self.base ** math.factorial(k + 1))

    def order_for(self, eps) -> int:
        eps = Fraction(eps)
        k = 1
        # tail_bound(k) <= eps  <=>  2 * eps^-1 <= base^((k+1)!)
        need = 2 / eps
        while True:
            if k > self.truncation:
                raise PrecisionExhausted(f"Liouville series needs order > {self.truncation} for eps={float(eps):.3g}")
            e = math.factorial(k + 1)
            if e * math.log(self.base) >= math.log(need.numerator) - math.log(need.denominator) + 1e-9 \
                    and Fraction(self.base ** e) >= need:
                return k
            k += 1

    def enclosure(self, eps):
        k = self.order_for(eps)
        s = self.partial_sum(k)
        return s, s + self.tail_bound(k)

    def __float__(self):
        return float(self.partial_sum(4))


@dataclass(frozen=True)
class DecimalLiteral(RealSpec):
    """A real known only through a finite decimal expansion (+- half a unit in the last place)."""

    digits: str

    @property
    def value(self) -> Fraction:
        return Fraction(self.digits)

    @property
    def precision(self) -> int:
        return len(self.digits.split(".")[1]) if "." in self.digits else 0

    def enclosure(self, eps):
        u = Fraction(1, 2 * 10 ** self.precision)
        if 2 * u > Fraction(eps):
            raise PrecisionExhausted(f"decimal literal {self.digits} is only known to +-{float(u):.1e}")
        return self.value - u, self.value + u

    def uncertainty_enclosure(self):
        u = Fraction(1, 2 * 10 ** self.precision)
        return self.value - u, self.value + u

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class Affine(RealSpec):
    """shift + scale * x for a RealSpec x and rationals shift, scale."""

    x: RealSpec
    shift: Fraction = Fraction(0)
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "shift", Fraction(self.shift))
        object.__setattr__(self, "scale", Fraction(self.scale))

    def exact(self):
        e = self.x.exact()
        if isinstance(e, Fraction):
            return self.shift + self.scale * e
        if isinstance(e, tuple):
            a, b, d = e
            return (self.shift + self.scale * a, self.scale * b, d)
        return None

    def enclosure(self, eps):
        if self.scale == 0:
            return self.shift, self.shift
        lo, hi = self.x.enclosure(Fraction(eps) / abs(self.scale))
        a, b = self.shift + self.scale * lo, self.shift + self.scale * hi
        return (a, b) if a <= b else (b, a)


def as_real(x) -> RealSpec:
    if isinstance(x, RealSpec):
        return x
    if isinstance(x, (_NumRational, str)):
        return Rational(Fraction(x))
    if isinstance(x, float):
        raise TypeError("floats are not exact reals; wrap them in DecimalLiteral or Fraction")
    raise TypeError(f"cannot interpret {x!r} as a real")


def _scale_real(x: RealSpec, r: Fraction) -> RealSpec:
    e = x.exact()
    if isinstance(e, Fraction):
        return Rational(e * r)
    if r == 1:
        return x
    if isinstance(e, tuple):
        a, b, d = e
        return QuadraticSurd(a * r, b * r, d)
    return Affine(x, 0, r)


# ---------------------------------------------------------------------------
# continued fractions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContinuedFraction:
    quotients: tuple
    convergents: tuple  # (p_k, q_k)
    terminated: bool


def _convergents(qs):
    p2, p1, q2, q1 = 0, 1, 1, 0
    out = []
    for a in qs:
        p2, p1 = p1, a * p1 + p2
        q2, q1 = q1, a * q1 + q2
        out.append((p1, q1))
    return tuple(out)


def _cf_rational(x: Fraction, depth: int):
    qs = []
    p, q = x.numerator, x.denominator
    while q and len(qs) < depth:
        a = p // q
        qs.append(a)
        p, q = q, p - a * q
    return qs, q == 0


def _cf_surd(a: Fraction, b: Fraction, d: int, depth: int):
    # write x = (P + sqrt(D)) / Q with Q | D - P^2
    den = a.denominator * b.denominator
    A = a.numerator * b.denominator
    B = b.numerator * a.denominator
    C = den
    if B < 0:
        A, B, C = -A, -B, -C
    P, D, Q = A, B * B * d, C
    if (D - P * P) % Q:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    s = math.isqrt(D)
    qs = []
    while len(qs) < depth:
        q_ = (P + s) // Q if Q > 0 else (P + s + 1) // Q
        qs.append(q_)
        P = q_ * Q - P
        Q = (D - P * P) // Q
    return qs


def _cf_interval(lo: Fraction, hi: Fraction, depth: int):
    """Partial quotients shared by every real in [lo, hi]."""
    qs = []
    while len(qs) < depth:
        a_lo, a_hi = math.floor(lo), math.floor(hi)
        if a_lo != a_hi:
            return qs, False
        a = a_lo
        qs.append(a)
        if lo == hi and lo == a:
            return qs, True
        if lo == a:
            return qs, False
        lo, hi = 1 / (hi - a), 1 / (lo - a)
    return qs, False


def continued_fraction(x, depth: int) -> ContinuedFraction:
    """Partial quotients [a0; a1, ...] and convergents p_k/q_k of x."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    x = as_real(x)
    e = x.exact()
    if isinstance(e, Fraction):
        qs, done = _cf_rational(e, depth)
        return ContinuedFraction(tuple(qs), _convergents(qs), done)
    if isinstance(e, tuple):
        qs = _cf_surd(*e, depth)
        return ContinuedFraction(tuple(qs), _convergents(qs), False)
    if isinstance(x, DecimalLiteral):
        lo, hi = x.uncertainty_enclosure()
        qs, done = _cf_interval(lo, hi, depth)
        if len(qs) < depth and not done:
            raise PrecisionExhausted(f"{x.digits} determines only {len(qs)} partial quotients")
        return ContinuedFraction(tuple(qs), _convergents(qs), done)
    eps = Fraction(1, 10 ** 40)
    while True:
        lo, hi = x.enclosure(eps)
        qs, done = _cf_interval(lo, hi, depth)
        if len(qs) >= depth or done:
            return ContinuedFraction(tuple(qs), _convergents(qs), done)
        eps = eps * eps  # PrecisionExhausted propagates from enclosure()


# ---------------------------------------------------------------------------
# NSA families and the two lattice conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NsaBlock:
    """One index split (j_p, i_q) with vectors v_p, p = 1..m'."""

    pivots: tuple
    others: tuple
    vectors: tuple

    def __post_init__(self):
        object.__setattr__(self, "pivots", tuple(int(j) for j in self.pivots))
        object.__setattr__(self, "others", tuple(int(i) for i in self.others))
        object.__setattr__(self, "vectors", tuple(tuple(as_real(c) for c in v) for v in self.vectors))
        if list(self.pivots) != sorted(self.pivots) or list(self.others) != sorted(self.others):
            raise ValueError("index lists must be increasing")
        if len(self.vectors) != len(self.pivots):
            raise ValueError("need one vector v_p per pivot index")
        for v in self.vectors:
            if len(v) != len(self.others):
                raise ValueError("each v_p must have length d = m - m'")

    def term_coefficients(self, m: int) -> list[list[RealSpec]]:
        rows = []
        for p, jp in enumerate(self.pivots):
            row = [Rational(0)] * m
            row[jp] = Rational(1)
            for q, iq in enumerate(self.others):
                row[iq] = self.vectors[p][q]
            rows.append(row)
        return rows


@dataclass(frozen=True)
class NsaFamily:
    m: int
    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise ValueError("empty family")
        for b in self.blocks:
            if sorted(b.pivots + b.others) != list(range(self.m)):
                raise ValueError(f"indices {b.pivots}+{b.others} do not partition 0..{self.m - 1}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "NsaFamily":
        """One block per constant field sum_j c_j d/dx_j (pivot = first nonzero c_j, rational)."""
        rows = [[as_real(c) for c in r] for r in rows]
        m = len(rows[0])
        blocks = []
        for r in rows:
            piv = None
            for j, c in enumerate(r):
                e = c.exact()
                if e is None:
                    continue
                if isinstance(e, Fraction) and e == 0:
                    continue
                if not isinstance(e, Fraction):
                    raise ValueError("pivot coefficient must be rational")
                piv = j
                break
            if piv is None:
                raise ValueError(f"row {r} has no rational nonzero pivot")
            c0 = r[piv].exact()
            others = tuple(i for i in range(m) if i != piv)
            lead = [i for i in range(piv)]
            if any(not (isinstance(r[i].exact(), Fraction) and r[i].exact() == 0) for i in lead):
                raise ValueError("coefficients before the pivot must vanish")
            v = tuple(_scale_real(r[i], 1 / c0) for i in others)
            blocks.append(NsaBlock((piv,), others, (v,)))
        return cls(m, tuple(blocks))

    @classmethod
    def from_range_bases(cls, bases) -> "NsaFamily":
        """Build from fields.RangeBasis objects (exact rational coefficients)."""
        blocks = []
        m = None
        for rb in bases:
            m = len(rb.basis[0].coords)
            vecs = tuple(tuple(rb.coefficients[q][p] for q in range(len(rb.others)))
                         for p in range(len(rb.pivots)))
            blocks.append(NsaBlock(rb.pivots, rb.others, vecs))
        return cls(m, tuple(blocks))

    def terms(self) -> list[tuple[int, list[RealSpec]]]:
        """(block index, coefficient row) for every (l, p)."""
        out = []
        for li, b in enumerate(self.blocks):
            for row in b.term_coefficients(self.m):
                out.append((li, row))
        return out

    @property
    def rational(self) -> bool:
        return all(isinstance(c.exact(), Fraction) for _, row in self.terms() for c in row)


@dataclass(frozen=True)
class ConditionResult:
    condition: str
    passed: bool
    radius: int
    constants: tuple
    worst_xi: tuple | None
    worst_ratio: float
    n_checked: int
    n_failed: int
    exact_zeros: tuple = ()
    failures: tuple = field(default=(), repr=False)


_FLOAT_EPS = 2.0 ** -52
_MARGIN = 1e-9


@contextmanager
def _iv_dps(dps):
    old = mpmath.iv.dps
    mpmath.iv.dps = dps
    try:
        yield
    finally:
        mpmath.iv.dps = old


def _iv_from_fraction(lo: Fraction, hi: Fraction):
    a = mpmath.iv.mpf(lo.numerator) / lo.denominator
    b = a if hi == lo else mpmath.iv.mpf(hi.numerator) / hi.denominator
    return mpmath.iv.mpf([a.a, b.b])


def _term_enclosures(rows, xi, eps):
    """Rational enclosures of each term sum_i c_i xi_i."""
    out = []
    scale = max(1, sum(abs(int(v)) for v in xi))
    for row in rows:
        lo = hi = Fraction(0)
        for c, v in zip(row, xi):
            v = int(v)
            if v == 0:
                continue
            a, b = c.enclosure(Fraction(eps) / scale)
            if v > 0:
                lo, hi = lo + a * v, hi + b * v
            else:
                lo, hi = lo + b * v, hi + a * v
        out.append((lo, hi))
    return out


def _term_is_zero(row, xi) -> bool | None:
    """Exact zero test in Q or Q(sqrt d); None when undecidable symbolically."""
    rat = Fraction(0)
    surd = {}
    for c, v in zip(row, xi):
        v = int(v)
        if v == 0:
            continue
        e = c.exact()
        if isinstance(e, Fraction):
            rat += e * v
        elif isinstance(e, tuple):
            a, b, d = e
            rat += a * v
            surd[d] = surd.get(d, Fraction(0)) + b * v
        else:
            return None
    return rat == 0 and all(b == 0 for b in surd.values())


def _sq_enclosure(lo, hi):
    if lo >= 0:
        return lo * lo, hi * hi
    if hi <= 0:
        return hi * hi, lo * lo
    return Fraction(0), max(lo * lo, hi * hi)


class _Evaluator:
    """Vectorised term values with certified float error, plus exact fallbacks."""

    def __init__(self, family: NsaFamily):
        self.family = family
        self.terms = family.terms()
        self.rows = [row for _, row in self.terms]
        self.block_of = np.array([li for li, _ in self.terms])
        self.rational = family.rational
        if self.rational:
            fr = [[c.exact() for c in row] for row in self.rows]
            den = 1
            for row in fr:
                for c in row:
                    den = den * c.denominator // math.gcd(den, c.denominator)
            self.den = den
            self.int_rows = [[int(c * den) for c in row] for row in fr]
        mids = []
        for row in self.rows:
            mids.append([float(c.approx(Fraction(1, 10 ** 30))) for c in row])
        self.float_rows = np.array(mids)  # (K, m)

    def float_terms(self, pts: np.ndarray):
        """(values, abs error bound), each of shape (N, K)."""
        if self.rational:
            ints = self._int_terms(pts)
            vals = ints.astype(float) / self.den
            return vals, np.abs(vals) * _FLOAT_EPS * 4
        vals = pts.astype(float) @ self.float_rows.T
        mag = np.abs(pts).astype(float) @ np.abs(self.float_rows).T
        err = mag * (self.family.m + 4) * _FLOAT_EPS + 1e-25 * np.abs(pts).sum(axis=1, keepdims=True)
        return vals, err

    def _int_terms(self, pts):
        k = np.array(self.int_rows, dtype=object if self._overflow(pts) else np.int64)
        if k.dtype == object:
            return pts.astype(object) @ k.T
        return pts @ k.T

    def _overflow(self, pts):
        bound = int(np.abs(pts).max(initial=0)) * sum(max(abs(c) for c in r) for r in self.int_rows) + 1
        return bound > 2 ** 31

    def exact_terms_sq(self, xi, eps=Fraction(1, 10 ** 40)):
        """Per-term enclosures of s_k^2 (exact points for rational families)."""
        if self.rational:
            vals = [sum(c.exact() * int(v) for c, v in zip(row, xi)) for row in self.rows]
            return [(v * v, v * v) for v in vals]
        return [_sq_enclosure(lo, hi) for lo, hi in _term_enclosures(self.rows, xi, eps)]

    def is_zero(self, k, xi):
        z = _term_is_zero(self.rows[k], xi)
        if z is not None:
            return z
        lo, hi = _term_enclosures([self.rows[k]], xi, Fraction(1, 10 ** 60))[0]
        if lo > 0 or hi < 0:
            return False
        raise PrecisionExhausted(f"cannot decide whether term {k} vanishes at {tuple(int(v) for v in xi)}")


def _threshold_iv(const: Fraction, base, expo: Fraction, dps: int):
    """const^2 * base^(-2*expo) as an mpmath interval; base may be an iv."""
    with _iv_dps(dps):
        c = _iv_from_fraction(const, const)
        e = _iv_from_fraction(expo, expo)
        return c * c * mpmath.iv.power(base, -2 * e)


def _decide_ge(sq_lo: Fraction, sq_hi: Fraction, const: Fraction, base_fn, expo: Fraction):
    """Decide s^2 >= const^2 * base^(-2 expo) rigorously; base_fn(dps) gives an iv for base."""
    if sq_hi == 0:
        return False
    for dps in (30, 60, 120, 240, 480):
        with _iv_dps(dps):
            thr = _threshold_iv(const, base_fn(dps), expo, dps)
            s = _iv_from_fraction(sq_lo, sq_hi)
            if s.a >= thr.b and not (s.a == thr.b and s.a != s.b):
                return True
            if s.b < thr.a:
                return False
            if s.a == s.b and thr.a == thr.b and s.a == thr.a:
                return True
    raise PrecisionExhausted("comparison undecided at 480 digits")


def _chunks(pts, size=400_000):
    return [pts[i:i + size] for i in range(0, len(pts), size)] or [pts]


def _prepare_points(m, radius, candidates):
    pts = lattice_points(m, radius * radius)
    pts = pts[(pts != 0).any(axis=1)]
    extra = []
    if candidates is not None:
        for c in candidates:
            c = tuple(int(v) for v in c)
            if any(c) and sum(v * v for v in c) <= radius * radius and max(abs(v) for v in c) > math.isqrt(radius * radius):
                extra.append(c)
    return pts, sorted(set(extra))


def _cond_G_chunk(ev: _Evaluator, pts, C: Fraction, rho: Fraction):
    vals, err = ev.float_terms(pts)
    s2 = (vals * vals).sum(axis=1)
    e2 = (2 * np.abs(vals) * err + err * err).sum(axis=1) + s2 * 4 * _FLOAT_EPS
    n2 = (pts.astype(float) ** 2).sum(axis=1)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        thr = float(C) ** 2 * np.power(1.0 + n2, -2.0 * float(rho))
        ratio = np.sqrt(s2 / thr)
    sure_pass = s2 - e2 > thr * (1 + _MARGIN)
    sure_fail = s2 + e2 < thr * (1 - _MARGIN)
    return s2, ratio, sure_pass, sure_fail


def _exact_cond_G(ev, xi, C, rho):
    encs = ev.exact_terms_sq(xi)
    lo = sum(e[0] for e in encs)
    hi = sum(e[1] for e in encs)
    if hi == 0 or (lo == 0 and all(ev.is_zero(k, xi) for k in range(len(encs)))):
        return False, True
    n2 = sum(int(v) ** 2 for v in xi)

    def base(dps):
        with _iv_dps(dps):
            return mpmath.iv.mpf(1 + n2)

    return _decide_ge(lo, hi, C, base, rho), False


def check_condition_G(family: NsaFamily, radius: int, trial, candidates=None) -> ConditionResult:
    """Check sum_{l,p} |xi_{j_p} + v_p . xi''|^2 >= C^2 (1+|xi|^2)^(-2 rho) for 0 < |xi| <= R.

    ``trial = (C, rho)``.  Extra lattice points outside the enumerated box
    (e.g. convergent denominators) may be supplied as ``candidates``.
    """
    C, rho = (Fraction(x) if not isinstance(x, float) else Fraction(x) for x in trial)
    if radius < 1 or C <= 0 or rho <= 0:
        raise ValueError("need R >= 1, C > 0, rho > 0")
    ev = _Evaluator(family)
    pts, extra = _prepare_points(family.m, radius, candidates)

    def work(chunk):
        return _cond_G_chunk(ev, chunk, C, rho)

    chunks = _chunks(pts)
    results = pmap(work, chunks)
    failures, zeros = [], []
    best = (math.inf, None)
    n_checked = 0
    for chunk, (s2, ratio, sure_pass, sure_fail) in zip(chunks, results):
        n_checked += len(chunk)
        i = int(np.argmin(ratio)) if len(ratio) else None
        if i is not None and ratio[i] < best[0]:
            best = (float(ratio[i]), tuple(int(v) for v in chunk[i]))
        for idx in np.flatnonzero(~sure_pass):
            xi = tuple(int(v) for v in chunk[idx])
            if sure_fail[idx] and not (s2[idx] == 0 and ev.rational):
                failures.append(xi)
                if ev.rational and s2[idx] == 0:
                    zeros.append(xi)
                continue
            ok, zero = _exact_cond_G(ev, xi, C, rho)
            if not ok:
                failures.append(xi)
            if zero:
                zeros.append(xi)
    for xi in extra:
        n_checked += 1
        ok, zero = _exact_cond_G(ev, xi, C, rho)
        encs = ev.exact_terms_sq(xi)
        mid = float(sum((a + b) / 2 for a, b in encs))
        n2 = sum(v * v for v in xi)
        r = _ratio_log(mid, float(C), n2, float(rho))
        if r < best[0]:
            best = (r, xi)
        if not ok:
            failures.append(xi)
        if zero:
            zeros.append(xi)
    worst = best[1]
    if failures:  # report the first failing point in enumeration order when ratios tie at zero
        zero_first = [x for x in failures if x in set(zeros)]
        if zero_first:
            worst = zero_first[0]
            best = (0.0, worst)
    return ConditionResult("G", not failures, radius, (C, rho), worst, best[0], n_checked,
                           len(failures), tuple(zeros[:16]), tuple(failures[:64]))


def _ratio_log(s2: float, C: float, n2: int, expo: float) -> float:
    if s2 <= 0:
        return 0.0
    lg = 0.5 * math.log(s2) - math.log(C) + expo * math.log1p(n2)
    return math.exp(min(lg, 700))


def _cond_I_chunk(ev: _Evaluator, pts, B: Fraction, M: Fraction):
    vals, err = ev.float_terms(pts)
    fam = ev.family
    # |xi''_(l)| per term
    others = [fam.blocks[li].others for li in ev.block_of]
    pf = pts.astype(float)
    norms = np.stack([np.sqrt((pf[:, list(o)] ** 2).sum(axis=1)) if o else np.zeros(len(pts)) for o in others], axis=1)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        thr = float(B) * np.power(1.0 + norms, -float(M))
        a = np.abs(vals)
        sure_term = a - err > thr * (1 + _MARGIN)
        maybe_term = a + err >= thr * (1 - _MARGIN)
        score = (a / thr).max(axis=1)
    sure_pass = sure_term.any(axis=1)
    sure_fail = ~maybe_term.any(axis=1)
    return score, sure_pass, sure_fail


def _exact_cond_I(ev: _Evaluator, xi, B, M):
    encs = ev.exact_terms_sq(xi)
    fam = ev.family
    all_zero = True
    for k, (lo, hi) in enumerate(encs):
        others = fam.blocks[ev.block_of[k]].others
        n2 = sum(int(xi[i]) ** 2 for i in others)
        if hi == 0:
            continue
        all_zero = False

        def base(dps, n2=n2):
            with _iv_dps(dps):
                return 1 + mpmath.iv.sqrt(mpmath.iv.mpf(n2))

        if _decide_ge(lo, hi, B, base, M / 2):
            return True, False
    zero = all_zero or all(ev.is_zero(k, xi) for k in range(len(encs)))
    return False, zero


def check_condition_I(family: NsaFamily, radius: int, constants, candidates=None) -> ConditionResult:
    """For every 0 < |xi| <= R, some (l, p) has |xi_{j_p} + v_p . xi''| >= B (1+|xi''_(l)|)^(-M)."""
    B, M = (Fraction(x) for x in constants)
    if radius < 1 or B <= 0 or M <= 0:
        raise ValueError("need R >= 1, B > 0, M > 0")
    ev = _Evaluator(family)
    pts, extra = _prepare_points(family.m, radius, candidates)
    chunks = _chunks(pts)
    results = pmap(lambda c: _cond_I_chunk(ev, c, B, M), chunks)
    failures, zeros = [], []
    best = (math.inf, None)
    n_checked = 0
    for chunk, (score, sure_pass, sure_fail) in zip(chunks, results):
        n_checked += len(chunk)
        if len(score):
            i = int(np.argmin(score))
            if score[i] < best[0]:
                best = (float(score[i]), tuple(int(v) for v in chunk[i]))
        for idx in np.flatnonzero(~sure_pass):
            xi = tuple(int(v) for v in chunk[idx])
            ok, zero = _exact_cond_I(ev, xi, B, M)
            if not ok:
                failures.append(xi)
            if zero:
                zeros.append(xi)
    for xi in extra:
        n_checked += 1
        ok, zero = _exact_cond_I(ev, xi, B, M)
        if not ok:
            failures.append(xi)
            if best[1] is None or best[0] > 0:
                best = (_score_I_extra(ev, xi, B, M), xi)
        if zero:
            zeros.append(xi)
    worst = best[1]
    if zeros:
        worst, best = zeros[0], (0.0, zeros[0])
    return ConditionResult("I", not failures, radius, (B, M), worst, best[0], n_checked,
                           len(failures), tuple(zeros[:16]), tuple(failures[:64]))


def _score_I_extra(ev, xi, B, M):
    encs = ev.exact_terms_sq(xi)
    fam = ev.family
    best = 0.0
    for k, (lo, hi) in enumerate(encs):
        others = fam.blocks[ev.block_of[k]].others
        nrm = math.sqrt(sum(int(xi[i]) ** 2 for i in others))
        if hi == 0:
            continue
        lg = 0.5 * (math.log(hi.numerator) - math.log(hi.denominator)) - math.log(float(B)) + float(M) * math.log1p(nrm)
        best = max(best, math.exp(min(lg, 700)))
    return best


@dataclass(frozen=True)
class NsaVerdict:
    """Both conditions at one radius, with the constants linking them."""

    radius: int
    g_holds: bool
    i_holds: bool
    constants_I: tuple
    constants_G: tuple
    direction: str
    agree: bool
    witnesses: tuple
    condition_I: ConditionResult = field(repr=False)
    condition_G: ConditionResult = field(repr=False)


def _lower_fraction(x) -> Fraction:
    """A rational lower bound of an mpmath interval."""
    a = mpmath.mpf(x.a)
    man, exp = a.man, a.exp
    return Fraction(int(man)) * (Fraction(2) ** int(exp)) if a != 0 else Fraction(0)


def _forward_constants(B: Fraction, M: Fraction):
    """(I) with (B, M)  =>  (G) with C = B 2^(-M/2), rho = M/2."""
    with _iv_dps(60):
        c = _iv_from_fraction(B, B) * mpmath.iv.power(2, -_iv_from_fraction(M, M) / 2)
    return _lower_fraction(c), M / 2


def _converse_constants(family: NsaFamily, B: Fraction, M: Fraction):
    """(G) with (C', rho') implies (I) with (B, M) when B <= 1; returns (C', rho').

    If (G) holds at xi with S >= C' (1+|xi|^2)^-rho', either some term is >= 1 >= B(...)^-M,
    or every term is < 1, in which case |xi|^2 + 1 <= (1 + A)(1 + |xi''|)^2 for every block.
    """
    K = len(family.terms())
    A = 0
    for b in family.blocks:
        V = max((max((float(c) for c in map(abs_real, v)), default=0.0) for v in b.vectors), default=0.0)
        A = max(A, len(b.pivots) * (1 + V) ** 2 + 1)
    rho = M / 2
    with _iv_dps(60):
        c = _iv_from_fraction(B, B) * mpmath.iv.sqrt(K) * mpmath.iv.power(1 + mpmath.iv.mpf(A) * (1 + 1e-12),
                                                                            _iv_from_fraction(rho, rho))
    hi = mpmath.mpf(c.b)
    return Fraction(int(hi.man)) * Fraction(2) ** int(hi.exp) + Fraction(1, 10 ** 12), rho


def abs_real(c: RealSpec) -> float:
    lo, hi = c.enclosure(Fraction(1, 10 ** 12))
    return max(abs(float(lo)), abs(float(hi)))


def verify_equivalence(family: NsaFamily, radius: int, constants=(Fraction(1, 4), 1), candidates=None) -> NsaVerdict:
    """Run both conditions with linked constants and confirm they agree at radius R."""
    B, M = (Fraction(x) for x in constants)
    if B > 1:
        raise ValueError("take B <= 1 so the converse constants are valid")
    cond_I = check_condition_I(family, radius, (B, M), candidates)
    if cond_I.passed:
        C, rho = _forward_constants(B, M)
        direction = "I=>G"
    else:
        C, rho = _converse_constants(family, B, M)
        direction = "notI=>notG"
    cond_G = check_condition_G(family, radius, (C, rho), candidates)
    agree = cond_I.passed == cond_G.passed
    wit = tuple(sorted(set(cond_I.failures[:8]) | set(cond_G.failures[:8])))
    return NsaVerdict(radius, cond_G.passed, cond_I.passed, (B, M), (C, rho), direction, agree,
                      wit, cond_I, cond_G)


# ---------------------------------------------------------------------------
# Liouville witnesses and convergent candidates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LiouvilleWitness:
    k: int
    p: int
    q: int
    gap_lo: Fraction = field(repr=False)
    gap_hi: Fraction = field(repr=False)
    verified: bool = True

    @property
    def log10_gap(self) -> float:
        return (math.log(self.gap_hi.numerator) - math.log(self.gap_hi.denominator)) / math.log(10)


def liouville_witnesses(alpha: LiouvilleSeries, k_max: int) -> list[LiouvilleWitness]:
    """(p_k, q_k) with q_k = base^(k!) and |q_k alpha - p_k| < 2 q_k^(1-k), checked exactly."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    out = []
    for k in range(1, k_max + 1):
        q = alpha.base ** math.factorial(k)
        p = alpha.partial_sum(k) * q
        assert p.denominator == 1
        p = int(p)
        if k + 1 > alpha.truncation:
            raise PrecisionExhausted(f"witness k={k} needs order {k + 1} > truncation {alpha.truncation}")
        s = alpha.partial_sum(k + 1)
        lo = q * s - p
        hi = lo + q * alpha.tail_bound(k + 1)
        bound = Fraction(2) * Fraction(q) ** (1 - k)
        ok = lo > 0 and hi < bound
        if not ok:
            raise ArithmeticError(f"Liouville bound failed at k={k}")
        out.append(LiouvilleWitness(k, p, q, lo, hi, ok))
    return out


def convergent_candidates(family: NsaFamily, depth: int = 8, liouville_order: int = 6) -> list[tuple]:
    """Lattice points aimed at near-resonances of single-irrational terms.

    For a term xi_j + c xi_i with exactly one irrational coefficient c, the
    convergents p/q of c give xi_j = -p, xi_i = q.
    """
    out = set()
    for _, row in family.terms():
        irr = [(i, c) for i, c in enumerate(row) if not isinstance(c.exact(), Fraction)]
        rat_nonzero = [i for i, c in enumerate(row) if isinstance(c.exact(), Fraction) and c.exact() != 0]
        if len(irr) != 1 or len(rat_nonzero) != 1:
            continue
        i, c = irr[0]
        j = rat_nonzero[0]
        lead = row[j].exact()
        base = c.x if isinstance(c, Affine) and c.shift == 0 else c
        scale = c.scale if isinstance(c, Affine) else Fraction(1)
        pairs = []
        if isinstance(base, LiouvilleSeries):
            k_top = min(liouville_order, base.truncation - 1)
            pairs = [(w.p, w.q) for w in liouville_witnesses(base, k_top)]
        else:
            try:
                pairs = list(continued_fraction(base, depth).convergents)
            except PrecisionExhausted:
                pairs = []
        for p, q in pairs:
            # lead*xi_j + scale*base*xi_i ~ 0 with xi_i = lead.num * q * scale.den, xi_j = -scale.num * p * lead.den
            xi = [0] * family.m
            xi[i] = lead.numerator * q * scale.denominator
            xi[j] = -scale.numerator * p * lead.denominator
            g = math.gcd(abs(xi[i]), abs(xi[j]))
            if g > 1:
                xi[i] //= g
                xi[j] //= g
            if any(xi):
                out.add(tuple(xi))
    return sorted(out, key=lambda x: (sum(v * v for v in x), x))
