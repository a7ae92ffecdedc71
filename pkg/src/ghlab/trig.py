"""Sparse trigonometric polynomials on the flat torus T^n.

A polynomial is a finite map ``tau -> coefficient`` for ``tau`` in Z^n and
stands for ``sum_tau c_tau exp(i tau.t)``.  With the normalised Haar
measure the exponentials are orthonormal, so inner products are plain
coefficient sums.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import numpy as np

from .scalars import QI, abs2, conj

__all__ = ["TrigPoly"]


def _exact_scalar(c):
    if isinstance(c, QI):
        return c
    if isinstance(c, Rational):
        return QI(c, 0)
    if isinstance(c, str):
        return QI(Fraction(c), 0)
    raise TypeError(f"exact trig polynomial needs rational coefficients, got {c!r}")


class TrigPoly:
    __slots__ = ("n", "coeffs", "exact")

    def __init__(self, n: int, coeffs=None, exact: bool = True):
        self.n = int(n)
        self.exact = bool(exact)
        out = {}
        for tau, c in (coeffs or {}).items():
            tau = tuple(int(x) for x in tau)
            if len(tau) != self.n:
                raise ValueError(f"frequency {tau} does not live in Z^{self.n}")
            c = _exact_scalar(c) if self.exact else complex(c)
            if c:
                out[tau] = out.get(tau, 0) + c
        self.coeffs = {k: v for k, v in out.items() if v}

    # constructors ---------------------------------------------------------
    @classmethod
    def constant(cls, n, c, exact=True):
        return cls(n, {(0,) * n: c}, exact)

    @classmethod
    def cos(cls, n, freq, amp=1, exact=True):
        """``amp * cos(freq . t)``."""
        freq = tuple(freq)
        if not any(freq):
            return cls.constant(n, amp, exact)
        half = Fraction(amp) / 2 if exact else amp / 2
        neg = tuple(-f for f in freq)
        return cls(n, {freq: half, neg: half}, exact)

    @classmethod
    def sin(cls, n, freq, amp=1, exact=True):
        """``amp * sin(freq . t)``."""
        freq = tuple(freq)
        neg = tuple(-f for f in freq)
        if exact:
            h = Fraction(amp) / 2
            return cls(n, {freq: QI(0, -h), neg: QI(0, h)}, True)
        h = amp / 2
        return cls(n, {freq: -1j * h, neg: 1j * h}, False)

    # structure ------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return all(not any(t) for t in self.coeffs)

    def is_real(self) -> bool:
        """Conjugate symmetry ``c(-tau) == conj(c(tau))``."""
        for tau, c in self.coeffs.items():
            other = self.coeffs.get(tuple(-x for x in tau), 0)
            if self.exact:
                if other != conj(c):
                    return False
            elif abs(other - conj(c)) > 1e-12 * (1 + abs(c)):
                return False
        return True

    def bandwidth(self) -> int:
        return max((max(abs(x) for x in t) for t in self.coeffs), default=0) if self.n else 0

    def constant_term(self):
        return self.coeffs.get((0,) * self.n, QI(0) if self.exact else 0j)

    def to_float(self) -> "TrigPoly":
        if not self.exact:
            return self
        return TrigPoly(self.n, {k: complex(v) for k, v in self.coeffs.items()}, exact=False)

    def _check(self, other):
        if self.n != other.n:
            raise ValueError("trig polynomials on different tori")
        if self.exact != other.exact:
            raise TypeError("cannot mix exact and floating trig polynomials")

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, TrigPoly):
            return self + TrigPoly.constant(self.n, other, self.exact)
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return TrigPoly(self.n, out, self.exact)

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly(self.n, {k: -v for k, v in self.coeffs.items()}, self.exact)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TrigPoly):
            c = _exact_scalar(other) if self.exact else complex(other)
            return TrigPoly(self.n, {k: v * c for k, v in self.coeffs.items()}, self.exact)
        self._check(other)
        out = {}
        for t1, c1 in self.coeffs.items():
            for t2, c2 in other.coeffs.items():
                t = tuple(a + b for a, b in zip(t1, t2))
                out[t] = out.get(t, 0) + c1 * c2
        return TrigPoly(self.n, out, self.exact)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, frozenset(self.coeffs.items())))

    def __repr__(self):
        items = ", ".join(f"{k}: {v}" for k, v in sorted(self.coeffs.items()))
        return f"TrigPoly(n={self.n}, {{{items}}})"

    def derivative(self, k: int) -> "TrigPoly":
        """Partial derivative in t_k (multiplier ``i tau_k``)."""
        if self.exact:
            return TrigPoly(self.n, {t: c * QI(0, t[k]) for t, c in self.coeffs.items()}, True)
        return TrigPoly(self.n, {t: c * 1j * t[k] for t, c in self.coeffs.items()}, False)

    def inner(self, other):
        """L^2 inner product ``<self, other>`` (normalised measure)."""
        self._check(other)
        acc = QI(0) if self.exact else 0j
        for k, v in self.coeffs.items():
            w = other.coeffs.get(k)
            if w is not None:
                acc = acc + v * conj(w)
        return acc

    def norm2(self):
        acc = Fraction(0) if self.exact else 0.0
        for v in self.coeffs.values():
            acc += abs2(v)
        return acc

    def sup_bound(self) -> float:
        """Sum of |coefficients|: an upper bound for the sup norm."""
        return float(sum(math.sqrt(float(abs2(v))) for v in self.coeffs.values()))

    # evaluation -----------------------------------------------------------
    def __call__(self, t):
        """Value at a point (float result; real part for real polynomials)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        val = 0j
        for tau, c in self.coeffs.items():
            val += complex(c) * complex(np.exp(1j * float(np.dot(tau, t))))
        return val

    def evaluate_grid(self, points: np.ndarray) -> np.ndarray:
        """Values at an array of points of shape (N, n)."""
        points = np.asarray(points, dtype=float).reshape(-1, self.n)
        if not self.coeffs:
            return np.zeros(points.shape[0], dtype=complex)
        taus = np.array(list(self.coeffs.keys()), dtype=float).reshape(-1, self.n)
        cs = np.array([complex(c) for c in self.coeffs.values()])
        return np.exp(1j * points @ taus.T) @ cs
