"""Eigenspace backends for the group factor: flat tori T^m and SU(2).

Conventions
-----------
Haar measure has total mass one on every factor, so the exponentials
``e^{i x.xi}`` on T^m and the normalised matrix coefficients
``sqrt(2j+1) * pi^j_{rc}`` on SU(2) are orthonormal.

For SU(2) the Lie algebra basis is ``X1 = i J1, X2 = -i J2, X3 = i J3``
where ``J1, J2, J3`` are the spin-j angular momentum matrices in the basis
``m = -j, ..., j`` (ascending).  This gives ``X3 = diag(i m)``, the cyclic
relations ``[X1, X2] = X3, [X2, X3] = X1, [X3, X1] = X2`` and
``X1^2 + X2^2 + X3^2 = -j(j+1) I``.  A left-invariant field acts on the
column index of the matrix coefficients, so on a whole shell it is
``kron(I_{2j+1}, rho_j(X))`` with modes ordered by ``(2j, row, col)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "GroupSpec",
    "SU2Mode",
    "Shell",
    "eigenvalue",
    "enumerate_shells",
    "lattice_points",
    "spin_matrices",
    "rep_block",
    "field_action",
    "casimir_residual",
    "weyl_partial_sums",
]


@dataclass(frozen=True)
class GroupSpec:
    kind: str
    m: int = 3

    def __post_init__(self):
        if self.kind == "torus":
            if self.m < 1:
                raise ValueError("torus dimension must be >= 1")
        elif self.kind == "su2":
            if self.m != 3:
                raise ValueError("su(2) has dimension 3")
        else:
            raise ValueError(f"unknown group kind {self.kind!r}")

    @classmethod
    def torus(cls, m: int) -> "GroupSpec":
        return cls("torus", m)

    @classmethod
    def su2(cls) -> "GroupSpec":
        return cls("su2", 3)

    @property
    def abelian(self) -> bool:
        return self.kind == "torus"

    @property
    def manifold_dim(self) -> int:
        return self.m

    def __str__(self):
        return f"T^{self.m}" if self.kind == "torus" else "SU(2)"


class SU2Mode(NamedTuple):
    """Matrix coefficient label; ``row`` and ``col`` run over 1..2j+1."""

    two_j: int
    row: int
    col: int

    @property
    def j(self) -> Fraction:
        return Fraction(self.two_j, 2)


def eigenvalue(group: GroupSpec, mode) -> Fraction:
    if group.kind == "torus":
        return Fraction(sum(int(x) * int(x) for x in mode))
    tj = mode[0]
    return Fraction(tj * (tj + 2), 4)


@dataclass(frozen=True)
class Shell:
    group: GroupSpec
    eigenvalue: Fraction
    modes: tuple = field(repr=False)

    @property
    def dimension(self) -> int:
        return len(self.modes)

    @property
    def two_j(self) -> int:
        if self.group.kind != "su2":
            raise AttributeError("two_j is only defined for SU(2) shells")
        return self.modes[0].two_j


def lattice_points(m: int, radius_sq) -> np.ndarray:
    """All xi in Z^m with |xi|^2 <= radius_sq, lexicographic, as an int64 array.

    Enumerates the l-infinity box and filters to the Euclidean ball.
    """
    r = math.isqrt(int(math.floor(radius_sq)))
    axis = np.arange(-r, r + 1, dtype=np.int64)
    grids = np.meshgrid(*([axis] * m), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    keep = (pts * pts).sum(axis=1) <= radius_sq
    return pts[keep]


def _torus_shells(m: int, lam_max) -> list[Shell]:
    group = GroupSpec.torus(m)
    pts = lattice_points(m, lam_max)
    lam = (pts * pts).sum(axis=1)
    order = np.argsort(lam, kind="stable")  # stable keeps lexicographic order inside a shell
    pts, lam = pts[order], lam[order]
    cuts = np.flatnonzero(np.diff(lam)) + 1
    shells = []
    for block_pts, block_lam in zip(np.split(pts, cuts), np.split(lam, cuts)):
        modes = tuple(tuple(int(v) for v in p) for p in block_pts)
        shells.append(Shell(group, Fraction(int(block_lam[0])), modes))
    return shells


def _su2_shells(lam_max) -> list[Shell]:
    group = GroupSpec.su2()
    shells = []
    tj = 0
    while Fraction(tj * (tj + 2), 4) <= lam_max:
        d = tj + 1
        modes = tuple(SU2Mode(tj, r, c) for r in range(1, d + 1) for c in range(1, d + 1))
        shells.append(Shell(group, Fraction(tj * (tj + 2), 4), modes))
        tj += 1
    return shells


def enumerate_shells(group: GroupSpec, lam_max) -> list[Shell]:
    """Every eigenspace with eigenvalue <= lam_max, ascending, modes in lexicographic order."""
    lam_max = Fraction(lam_max)
    if lam_max < 0:
        raise ValueError("lam_max must be non-negative")
    if group.kind == "torus":
        return _torus_shells(group.m, lam_max)
    return _su2_shells(lam_max)


@lru_cache(maxsize=None)
def _spin_matrices(two_j: int):
    d = two_j + 1
    j = two_j / 2.0
    ms = np.arange(d) - j  # ascending m = -j..j
    jp = np.zeros((d, d))
    for k in range(d - 1):
        m = ms[k]
        jp[k + 1, k] = math.sqrt(j * (j + 1) - m * (m + 1))
    jm = jp.T
    j1 = (jp + jm) / 2.0
    j2 = (jp - jm) / 2.0j
    j3 = np.diag(ms)
    mats = (1j * j1, -1j * j2, 1j * j3.astype(complex))
    for a in mats:
        a.setflags(write=False)
    return mats


def spin_matrices(two_j: int):
    """``(X1, X2, X3)`` in the spin-j representation (read-only complex arrays)."""
    if two_j < 0:
        raise ValueError("two_j must be non-negative")
    return _spin_matrices(int(two_j))


def _coords(X) -> tuple:
    return tuple(getattr(X, "coords", X))


def rep_block(X, two_j: int) -> np.ndarray:
    """rho_j(X) as a (2j+1)x(2j+1) matrix."""
    c = _coords(X)
    if len(c) != 3:
        raise ValueError(f"su(2) element needs 3 coordinates, got {len(c)}")
    mats = spin_matrices(two_j)
    return sum(float(ck) * mk for ck, mk in zip(c, mats))


def field_action(X, shell: Shell) -> np.ndarray:
    """Matrix of the left-invariant field X on the shell, in the shell's mode basis."""
    c = _coords(X)
    if len(c) != shell.group.m:
        raise ValueError(f"element has {len(c)} coordinates, group {shell.group} needs {shell.group.m}")
    if shell.group.kind == "torus":
        mult = [sum(float(ck) * xk for ck, xk in zip(c, xi)) for xi in shell.modes]
        return np.diag(1j * np.asarray(mult, dtype=float))
    tj = shell.two_j
    return np.kron(np.eye(tj + 1), rep_block(c, tj))


def casimir_residual(group: GroupSpec, shell: Shell) -> float:
    """Operator norm of ``sum_j X_j^2 + lambda I`` on the shell.

    On tori the multipliers are integers and the residual is computed exactly.
    On SU(2) the action is ``I (x) rho_j`` so the norm is taken on one block.
    """
    if group.kind == "torus":
        worst = max(abs(-sum(x * x for x in xi) + shell.eigenvalue) for xi in shell.modes)
        return float(worst)
    tj = shell.two_j
    acc = sum(m @ m for m in spin_matrices(tj))
    acc = acc + float(shell.eigenvalue) * np.eye(tj + 1)
    return float(np.linalg.norm(acc, 2))


def weyl_partial_sums(group: GroupSpec, lam_max) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in (0, lam_max] and the running sums of d_lambda * lambda^(-2 dim)."""
    if group.kind == "torus":
        pts = lattice_points(group.m, lam_max)
        lam = (pts * pts).sum(axis=1)
        vals, counts = np.unique(lam[lam > 0], return_counts=True)
        lams = vals.astype(float)
        dims = counts.astype(float)
    else:
        tj = np.arange(1, 2 * math.isqrt(int(lam_max) + 1) + 4)
        lams = tj * (tj + 2) / 4.0
        keep = lams <= float(lam_max)
        lams, dims = lams[keep], ((tj + 1) ** 2)[keep].astype(float)
    terms = dims * lams ** (-2.0 * group.manifold_dim)
    return lams, np.cumsum(terms)
