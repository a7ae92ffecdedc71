"""Sparse double Fourier data on T^n x G.

A coefficient is indexed by ``(tau, mode)`` with ``tau`` in Z^n and ``mode``
a lattice frequency (G = T^m) or an ``SU2Mode``.  Both factors carry the
normalised orthonormal bases of ``spectral``, so Parseval is a plain sum of
squared moduli.
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction

import numpy as np

from .scalars import QI, abs2, conj
from .spectral import GroupSpec, SU2Mode, eigenvalue, rep_block
from .trig import TrigPoly

__all__ = ["FourierData", "mu_of"]


def mu_of(tau) -> int:
    return sum(int(x) * int(x) for x in tau)


def _coerce(c, exact):
    if exact:
        if isinstance(c, QI):
            return c
        if isinstance(c, (int, Fraction)):
            return QI(c, 0)
        raise TypeError(f"exact Fourier data needs rational complex scalars, got {c!r}")
    return complex(c)


class FourierData:
    __slots__ = ("group", "n", "coeffs", "exact")

    def __init__(self, group: GroupSpec, n: int, coeffs=None, exact: bool = True):
        if exact and not group.abelian:
            raise TypeError("SU(2) data is floating: spin matrices have irrational entries")
        self.group = group
        self.n = int(n)
        self.exact = bool(exact)
        out = {}
        for (tau, mode), c in (coeffs or {}).items():
            tau = tuple(int(x) for x in tau)
            if len(tau) != self.n:
                raise ValueError(f"T-frequency {tau} is not in Z^{self.n}")
            mode = SU2Mode(*mode) if group.kind == "su2" else tuple(int(x) for x in mode)
            if group.kind == "torus" and len(mode) != group.m:
                raise ValueError(f"G-mode {mode} does not match {group}")
            c = _coerce(c, self.exact)
            if c:
                key = (tau, mode)
                out[key] = out.get(key, 0) + c
        self.coeffs = {k: v for k, v in out.items() if v}

    @classmethod
    def single(cls, group, n, tau, mode, c=1, exact=True):
        return cls(group, n, {(tuple(tau), tuple(mode)): c}, exact)

    def _new(self, coeffs):
        return FourierData(self.group, self.n, coeffs, self.exact)

    def _check(self, other):
        if self.group != other.group or self.n != other.n:
            raise ValueError("Fourier data on different products")
        if self.exact != other.exact:
            raise TypeError("cannot mix exact and floating Fourier data")

    def to_float(self):
        if not self.exact:
            return self
        return FourierData(self.group, self.n, {k: complex(v) for k, v in self.coeffs.items()}, False)

    # linear structure -----------------------------------------------------
    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return self._new(out)

    def __neg__(self):
        return self._new({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = _coerce(c, self.exact)
        return self._new({k: v * c for k, v in self.coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, FourierData):
            return NotImplemented
        return (self.group, self.n, self.coeffs) == (other.group, other.n, other.coeffs)

    def __len__(self):
        return len(self.coeffs)

    def is_zero(self):
        return not self.coeffs

    def inner(self, other):
        self._check(other)
        acc = QI(0) if self.exact else 0j
        for k, v in self.coeffs.items():
            w = other.coeffs.get(k)
            if w is not None:
                acc = acc + v * conj(w)
        return acc

    def norm2(self):
        return sum((abs2(v) for v in self.coeffs.values()), Fraction(0) if self.exact else 0.0)

    def norm(self) -> float:
        return float(self.norm2()) ** 0.5

    def max_abs_diff(self, other) -> float:
        d = self - other
        return max((float(abs2(v)) ** 0.5 for v in d.coeffs.values()), default=0.0)

    # spectral bookkeeping -------------------------------------------------
    def g_eigenvalue(self, mode) -> Fraction:
        return eigenvalue(self.group, mode)

    def blocks(self) -> list:
        """``[((mu, lambda), |block|^2), ...]`` sorted by (mu, lambda)."""
        acc = defaultdict(lambda: Fraction(0) if self.exact else 0.0)
        for (tau, mode), v in self.coeffs.items():
            acc[(mu_of(tau), self.g_eigenvalue(mode))] += abs2(v)
        return sorted(acc.items())

    def g_eigenvalues(self) -> list:
        return sorted({self.g_eigenvalue(m) for _, m in self.coeffs})

    def projection_G(self, lam):
        lam = Fraction(lam)
        return self._new({k: v for k, v in self.coeffs.items() if self.g_eigenvalue(k[1]) == lam})

    def projection_T(self, mu):
        return self._new({k: v for k, v in self.coeffs.items() if mu_of(k[0]) == mu})

    def laplacian_T(self):
        return self._new({k: v * mu_of(k[0]) for k, v in self.coeffs.items()})

    def laplacian_G(self):
        return self._new({k: v * _scalar(self.g_eigenvalue(k[1]), self.exact) for k, v in self.coeffs.items()})

    def laplacian(self):
        return self.laplacian_T() + self.laplacian_G()

    # differential operators -----------------------------------------------
    def dt(self, k: int):
        """Partial derivative in t_k."""
        if self.exact:
            return self._new({key: v * QI(0, key[0][k]) for key, v in self.coeffs.items()})
        return self._new({key: v * 1j * key[0][k] for key, v in self.coeffs.items()})

    def multiply(self, poly: TrigPoly):
        """Pointwise product with a trig polynomial in t (a convolution in tau)."""
        if poly.n != self.n:
            raise ValueError("trig polynomial lives on a different torus")
        if poly.exact != self.exact:
            poly = poly.to_float() if not self.exact else None
            if poly is None:
                raise TypeError("cannot multiply exact data by a floating polynomial")
        out = {}
        for (tau, mode), v in self.coeffs.items():
            for sigma, c in poly.coeffs.items():
                key = (tuple(a + b for a, b in zip(tau, sigma)), mode)
                out[key] = out.get(key, 0) + c * v
        return self._new(out)

    def apply_lie(self, X):
        """Action of a left-invariant field X = sum_j c_j X_j on the G factor."""
        c = tuple(getattr(X, "coords", X))
        if len(c) != self.group.m:
            raise ValueError("Lie element does not match the group")
        if self.group.kind == "torus":
            out = {}
            for (tau, xi), v in self.coeffs.items():
                s = sum((cj * x for cj, x in zip(c, xi)), 0)
                if self.exact:
                    out[(tau, xi)] = v * QI(0, Fraction(s))
                else:
                    out[(tau, xi)] = v * 1j * float(s)
            return self._new(out)
        rows = defaultdict(dict)
        for (tau, mode), v in self.coeffs.items():
            rows[(tau, mode.two_j, mode.row)][mode.col] = v
        out = {}
        for (tau, tj, r), cols in rows.items():
            d = tj + 1
            vec = np.zeros(d, dtype=complex)
            for col, v in cols.items():
                vec[col - 1] = v
            res = rep_block(c, tj) @ vec
            for i in range(d):
                if res[i] != 0:
                    out[(tau, SU2Mode(tj, r, i + 1))] = complex(res[i])
        return self._new(out)

    def __repr__(self):
        return f"FourierData({self.group}, n={self.n}, {len(self.coeffs)} coefficients, exact={self.exact})"


def _scalar(x: Fraction, exact):
    return QI(x, 0) if exact else float(x)
