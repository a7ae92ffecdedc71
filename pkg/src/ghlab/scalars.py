"""Exact complex-rational scalars and small numeric helpers.

The exact mode of the package works over the Gaussian rationals Q(i); the
floating mode uses Python ``complex``.  Everything that has to mix both
goes through the helpers at the bottom of this module.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

__all__ = [
    "QI",
    "as_fraction",
    "is_exact",
    "abs2",
    "conj",
    "log_abs",
    "log_fraction",
    "ZERO",
    "I",
]


class QI:
    """Gaussian rational ``re + i*im`` with ``Fraction`` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def _coerce(cls, other):
        if isinstance(other, QI):
            return other
        if isinstance(other, Rational):
            return cls(other, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QI(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QI(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QI(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        if isinstance(other, Rational):
            return QI(self.re * other, self.im * other)
        if isinstance(other, QI):
            return QI(self.re * other.re - self.im * other.im,
                      self.re * other.im + self.im * other.re)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Rational):
            return QI(self.re / other, self.im / other)
        if isinstance(other, QI):
            n = other.abs2()
            return self * other.conjugate() * Fraction(1) / n
        return NotImplemented

    def __neg__(self):
        return QI(-self.re, -self.im)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            if isinstance(other, complex):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QI({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def conjugate(self):
        return QI(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im


ZERO = QI(0, 0)
I = QI(0, 1)


def is_exact(x) -> bool:
    return isinstance(x, (QI, Rational))


def as_fraction(x) -> Fraction:
    """Exact rational value of an int/Fraction/decimal string like ``"3/4"``."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError(f"refusing to convert float {x!r} to an exact rational")
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def conj(x):
    if isinstance(x, QI):
        return x.conjugate()
    if isinstance(x, Rational):
        return x
    return x.conjugate()


def abs2(x):
    """|x|^2, exact for exact inputs."""
    if isinstance(x, QI):
        return x.abs2()
    if isinstance(x, Rational):
        return Fraction(x) * x
    return x.real * x.real + x.imag * x.imag


def log_fraction(q) -> float:
    """Natural log of a positive rational, safe for huge numerators/denominators."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("log of non-positive number")
    return math.log(q.numerator) - math.log(q.denominator)


def log_abs(x) -> float:
    """log|x| for exact or floating scalars; -inf at zero."""
    if isinstance(x, (QI, Rational)):
        a2 = abs2(x)
        return -math.inf if a2 == 0 else 0.5 * log_fraction(a2)
    a = abs(x)
    return -math.inf if a == 0 else math.log(a)
