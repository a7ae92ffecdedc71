"""Shell-by-shell lower bounds for systems of left-invariant fields.

For a system with generators L_1..L_K the quantity of interest on a shell
E_lambda is the smallest singular value of the stacked matrices of the L_k.
A system is globally hypoelliptic exactly when these minima stay above
C (1 + lambda)^(-rho) from some lambda_0 on; this module computes them,
fits (C, rho), and produces witnesses and singular solutions when the bound
fails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._parallel import pmap
from .diophantine import NsaFamily, _term_enclosures, _sq_enclosure, convergent_candidates
from .fields import LieElement, SystemSpec, bracket, lie_hull
from .fourier import FourierData
from .scalars import log_fraction
from .spectral import GroupSpec, SU2Mode, enumerate_shells, lattice_points, rep_block

__all__ = [
    "ZERO_TOL",
    "LowerBoundCheck",
    "lower_bound_check",
    "ShellMinimum",
    "ExponentFit",
    "InsufficientData",
    "GhReport",
    "SymbolWitness",
    "SingularSolution",
    "HullCheck",
    "shell_minima",
    "fit_exponent",
    "gh_verdict",
    "convergent_witnesses",
    "symbol_witness",
    "build_singular_solution",
    "hull_checks",
]

ZERO_TOL = 1e-10  # floating zero detection for SU(2) and irrational torus systems

CONSISTENT = "ConsistentGH"
FAIL_ZERO = "FailZeroSymbol"
FAIL_SUPER = "FailSuperpolynomial"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ShellMinimum:
    lam: Fraction
    sigma: float
    sigma_sq: Fraction | None  # exact value on rational torus systems
    mode: tuple
    vector: tuple = field(default=(), repr=False)

    @property
    def is_zero(self) -> bool:
        if self.sigma_sq is not None:
            return self.sigma_sq == 0
        return self.sigma <= ZERO_TOL

    @property
    def log_sigma(self) -> float:
        if self.sigma_sq is not None:
            return 0.5 * log_fraction(self.sigma_sq) if self.sigma_sq else -math.inf
        return math.log(self.sigma) if self.sigma > 0 else -math.inf


def _torus_rows(gens, m):
    exact = all(g.exact for g in gens)
    if exact:
        den = 1
        for g in gens:
            for c in g.coords:
                den = den * c.denominator // math.gcd(den, c.denominator)
        ints = [[int(c * den) for c in g.coords] for g in gens]
        return True, den, ints
    return False, 1, [[float(c) for c in g.coords] for g in gens]


def _torus_minima(gens, m, lam_max) -> list[ShellMinimum]:
    pts = lattice_points(m, lam_max)
    lam = (pts * pts).sum(axis=1)
    exact, den, rows = _torus_rows(gens, m)
    if exact:
        bound = int(np.abs(pts).max(initial=0)) * max(sum(abs(c) for c in r) for r in rows)
        if bound ** 2 * len(rows) < 2 ** 62:
            vals = pts @ np.array(rows, dtype=np.int64).T
            s2 = (vals * vals).sum(axis=1)
        else:
            vals = pts.astype(object) @ np.array(rows, dtype=object).T
            s2 = (vals * vals).sum(axis=1)
        key = s2.astype(float) if s2.dtype == object else s2
    else:
        vals = pts.astype(float) @ np.array(rows).T
        s2 = (vals * vals).sum(axis=1)
        key = s2
    # sort by (lambda, sigma^2); lexsort is stable so ties keep lexicographic mode order
    order = np.lexsort((key, lam))
    lam_s = lam[order]
    firsts = np.concatenate(([0], np.flatnonzero(np.diff(lam_s)) + 1))
    out = []
    for i in firsts:
        idx = order[i]
        if exact and s2.dtype == object:  # float keys may misorder huge values; recheck the shell
            block = order[i:(np.searchsorted(lam_s, lam_s[i], side="right"))]
            idx = min(block, key=lambda j: (s2[j], tuple(pts[j])))
        xi = tuple(int(v) for v in pts[idx])
        if exact:
            sq = Fraction(int(s2[idx]), den * den)
            sigma = math.sqrt(float(sq))
        else:
            sq = None
            sigma = math.sqrt(float(s2[idx]))
            if sigma <= ZERO_TOL:
                sigma = 0.0
        out.append(ShellMinimum(Fraction(int(lam[idx])), sigma, sq, xi))
    return out


def _su2_minimum(args):
    gens, shell = args
    tj = shell.two_j
    stack = np.vstack([rep_block(g.coords, tj) for g in gens])
    _, s, vh = np.linalg.svd(stack)
    sigma = float(s[-1])
    v = vh[-1].conj()
    col = int(np.argmax(np.round(np.abs(v), 12))) + 1
    if sigma <= ZERO_TOL:
        sigma = 0.0
    return ShellMinimum(shell.eigenvalue, sigma, None, SU2Mode(tj, 1, col), tuple(complex(x) for x in v))


def _generators(system) -> list[LieElement]:
    if isinstance(system, SystemSpec):
        return system.generators()
    return list(system)


def shell_minima(system, lam_max, group: GroupSpec | None = None) -> list[ShellMinimum]:
    """Smallest singular value of the stacked generator actions on every shell with lambda <= lam_max.

    ``system`` is a SystemSpec (its range-basis generators are used) or a plain
    list of LieElements.  On tori the minimum is taken over the modes of the
    shell, exactly when all coordinates are rational.
    """
    gens = _generators(system)
    if not gens:
        raise ValueError("empty generator list")
    group = group or gens[0].group
    if group.kind == "torus":
        return _torus_minima(gens, group.m, Fraction(lam_max))
    shells = enumerate_shells(group, lam_max)
    return pmap(_su2_minimum, [(gens, sh) for sh in shells])


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class ExponentFit:
    C: float
    rho: float
    quality: float
    n_points: int
    zero_lams: tuple
    envelope: str
    C_certified: float
    bounded_below: bool = False


def _records(lams, logs):
    """Indices of strict running minima (the lower envelope seen from lambda_0 upwards)."""
    keep, best = [], math.inf
    for i, v in enumerate(logs):
        if v < best:
            keep.append(i)
            best = v
    return keep


def _lsq(x, y):
    A = np.vstack([np.ones_like(x), x]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    quality = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(coef[0]), float(coef[1]), quality


def fit_log_power(lams, logs, envelope="lower"):
    """Fit log v = log C - rho log(1 + lambda); returns (C, rho, quality, n_used, bounded_below)."""
    lams = list(lams)
    logs = list(logs)
    idx = _records(lams, logs) if envelope == "lower" else list(range(len(lams)))
    if envelope == "lower" and len(idx) < 3:
        # no decay along the data: bounded below by its minimum
        return math.exp(min(logs)), 0.0, 1.0, len(lams), True
    x = np.array([math.log1p(float(lams[i])) for i in idx])
    y = np.array([logs[i] for i in idx])
    a, b, q = _lsq(x, y)
    return math.exp(a), -b, q, len(idx), False


def fit_exponent(minima: Sequence[ShellMinimum], lambda_0=None, envelope: str = "lower") -> ExponentFit:
    """Least-squares fit of log sigma_min against log C - rho log(1 + lambda).

    Zero minima are excluded and returned in ``zero_lams``.  With
    ``envelope="lower"`` only the strict running minima enter the fit, which
    follows the worst shells; ``"all"`` uses every positive shell.
    """
    if envelope not in ("lower", "all"):
        raise ValueError("envelope must be 'lower' or 'all'")
    lambda_0 = _default_lambda0(minima) if lambda_0 is None else Fraction(lambda_0)
    used = [s for s in minima if s.lam >= lambda_0]
    zeros = tuple(s.lam for s in used if s.is_zero)
    pos = [s for s in used if not s.is_zero]
    if len(pos) < 3:
        raise InsufficientData(f"need at least 3 positive shells above lambda_0={lambda_0}, got {len(pos)}")
    lams = [s.lam for s in pos]
    logs = [s.log_sigma for s in pos]
    C, rho, q, n, bounded = fit_log_power(lams, logs, envelope)
    rho_c = max(rho, 0.0)
    C_cert = min(math.exp(v + rho_c * math.log1p(float(l))) for l, v in zip(lams, logs))
    return ExponentFit(C, rho, q, n, zeros, envelope, C_cert, bounded)


def _default_lambda0(minima):
    pos = [s.lam for s in minima if s.lam > 0]
    if not pos:
        raise InsufficientData("no positive eigenvalue in the data")
    return min(pos)


@dataclass(frozen=True)
class SymbolWitness:
    """A lattice point xi with a rigorous enclosure of |symbol(xi)|^2 (an upper bound for its shell)."""

    xi: tuple
    lam: int
    sigma_sq_lo: Fraction
    sigma_sq_hi: Fraction

    @property
    def is_zero(self) -> bool:
        return self.sigma_sq_hi == 0

    @property
    def log_sigma(self) -> float:
        return 0.5 * log_fraction(self.sigma_sq_hi) if self.sigma_sq_hi else -math.inf

    def decays_faster_than(self, s) -> bool:
        """sigma <= (1 + lambda)^(-s), decided exactly when 2s is an integer."""
        if self.is_zero:
            return True
        s = Fraction(s).limit_denominator(1000)
        if (2 * s).denominator == 1:
            return self.sigma_sq_hi * Fraction(1 + self.lam) ** int(2 * s) <= 1
        return self.log_sigma + float(s) * math.log1p(self.lam) < -1e-9


def symbol_witness(family: NsaFamily, xi) -> SymbolWitness:
    """Enclosure of sum_k |row_k . xi|^2 tight to relative width 1e-6."""
    rows = [row for _, row in family.terms()]
    xi = tuple(int(v) for v in xi)
    lam = sum(v * v for v in xi)
    if family.rational:
        val = sum(sum(c.exact() * v for c, v in zip(row, xi)) ** 2 for row in rows)
        return SymbolWitness(xi, lam, val, val)
    eps = Fraction(1, 10 ** 40)
    for _ in range(8):
        encs = [_sq_enclosure(lo, hi) for lo, hi in _term_enclosures(rows, xi, eps)]
        lo = sum(e[0] for e in encs)
        hi = sum(e[1] for e in encs)
        if lo > 0 and hi - lo <= lo / 10 ** 6:
            return SymbolWitness(xi, lam, lo, hi)
        eps = eps * eps
    return SymbolWitness(xi, lam, lo, hi)


def convergent_witnesses(family: NsaFamily, depth: int = 10, liouville_order: int = 6) -> list[SymbolWitness]:
    """Witnesses at continued-fraction (or Liouville) convergents, ascending in lambda."""
    return [symbol_witness(family, xi) for xi in convergent_candidates(family, depth, liouville_order)]


@dataclass(frozen=True)
class GhReport:
    minima: tuple = field(repr=False)
    fit: ExponentFit | None
    verdict: str
    witnesses: tuple
    lambda_0: Fraction
    s: float
    zero_shells: tuple = ()
    note: str = ""


def gh_verdict(minima: Sequence[ShellMinimum], extra_witnesses: Sequence[SymbolWitness] = (), s=5,
               min_witnesses: int = 3, lambda_0=None, min_quality: float = 0.8) -> GhReport:
    """Classify tested data as ConsistentGH / FailZeroSymbol / FailSuperpolynomial / Inconclusive.

    FailZeroSymbol needs at least ``min_witnesses`` zero shells above
    lambda_0, the last in the upper quarter of the tested range.
    FailSuperpolynomial needs ``min_witnesses`` points (shells or extra
    witnesses) with sigma <= (1 + lambda)^(-s).
    """
    minima = tuple(sorted(minima, key=lambda m: m.lam))
    lambda_0 = _default_lambda0(minima) if lambda_0 is None else Fraction(lambda_0)
    used = [m for m in minima if m.lam >= lambda_0]
    top = max((m.lam for m in minima), default=Fraction(0))
    zeros = [m for m in used if m.is_zero]
    if len(zeros) >= min_witnesses and zeros[-1].lam * 4 >= top:
        return GhReport(minima, None, FAIL_ZERO, tuple(m.mode for m in zeros), lambda_0, s,
                        tuple(m.lam for m in zeros))
    fast = []
    for w in extra_witnesses:
        if w.lam >= lambda_0 and w.decays_faster_than(s):
            fast.append(w)
    for m in used:
        if not m.is_zero and m.log_sigma + float(s) * math.log1p(float(m.lam)) < -1e-9:
            fast.append(m)
    fast_lams = sorted({int(w.lam) for w in fast})
    if len(fast_lams) >= min_witnesses:
        fast = sorted(fast, key=lambda w: w.lam)
        wit = tuple(w.xi if isinstance(w, SymbolWitness) else tuple(w.mode) for w in fast)
        return GhReport(minima, None, FAIL_SUPER, wit, lambda_0, s, tuple(m.lam for m in zeros))
    if zeros:
        return GhReport(minima, None, INCONCLUSIVE, tuple(m.mode for m in zeros), lambda_0, s,
                        tuple(m.lam for m in zeros), "isolated zero shells")
    try:
        fit = fit_exponent(used, lambda_0)
    except InsufficientData as exc:
        return GhReport(minima, None, INCONCLUSIVE, (), lambda_0, s, (), str(exc))
    verdict = CONSISTENT if fit.quality >= min_quality else INCONCLUSIVE
    return GhReport(minima, fit, verdict, (), lambda_0, s, ())


@dataclass(frozen=True)
class SingularSolution:
    u: FourierData = field(repr=False)
    modes: tuple
    lams: tuple

    def shell_norms(self) -> list:
        return [(lam, float(self.u.projection_G(lam).norm2()) ** 0.5) for lam in self.lams]

    def image_log_norms(self, generators) -> list:
        """[(lambda, log ||F_lambda(L u)||) for L in generators] per witness, exactly on tori.

        Torus generators may be rows of RealSpec / rational / float coordinates;
        SU(2) generators are LieElements.
        """
        out = []
        group = self.u.group
        for mode, lam in zip(self.modes, self.lams):
            row = []
            for g in generators:
                if group.kind == "torus":
                    row.append(_log_abs_dot(getattr(g, "coords", g), mode))
                else:
                    col = rep_block(getattr(g, "coords", g), mode.two_j)[:, mode.col - 1]
                    nrm = float(np.linalg.norm(col))
                    row.append(math.log(nrm) if nrm > ZERO_TOL else -math.inf)
            out.append((lam, tuple(row)))
        return out

    def image(self, X) -> FourierData:
        return self.u.apply_lie(X)


def _log_abs_dot(coords, xi) -> float:
    from .diophantine import as_real, RealSpec

    if all(isinstance(c, (int, Fraction)) for c in coords):
        v = sum(Fraction(c) * int(x) for c, x in zip(coords, xi))
        return log_fraction(abs(v)) if v else -math.inf
    if all(isinstance(c, float) for c in coords):
        v = sum(c * int(x) for c, x in zip(coords, xi))
        return math.log(abs(v)) if abs(v) > ZERO_TOL else -math.inf
    row = [as_real(c) if not isinstance(c, RealSpec) else c for c in coords]
    fam_row = [row]
    eps = Fraction(1, 10 ** 40)
    for _ in range(8):
        lo, hi = _term_enclosures(fam_row, xi, eps)[0]
        if lo > 0 or hi < 0:
            a, b = abs(lo), abs(hi)
            if abs(b - a) <= min(a, b) / 10 ** 6:
                return log_fraction(max(a, b))
        elif lo == hi == 0:
            return -math.inf
        eps = eps * eps
    return log_fraction(max(abs(lo), abs(hi)))


def build_singular_solution(group: GroupSpec, modes: Sequence, n: int = 1) -> SingularSolution:
    """u = sum_nu phi_nu with unit coefficients on the witness modes (constant in t)."""
    from .spectral import eigenvalue

    modes = [SU2Mode(*m) if group.kind == "su2" else tuple(int(x) for x in m) for m in modes]
    if not modes:
        raise ValueError("need at least one witness mode")
    lams = [eigenvalue(group, m) for m in modes]
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ValueError("witness eigenvalues must be strictly increasing")
    exact = group.abelian
    u = FourierData(group, n, {((0,) * n, m): 1 for m in modes}, exact=exact)
    return SingularSolution(u, tuple(modes), tuple(lams))


@dataclass(frozen=True)
class HullCheck:
    kind: str
    hull_dim: int
    group_dim: int
    commutative: bool


def hull_checks(system) -> HullCheck:
    """Hormander-type sufficiency (hull = g) versus the commutative-hull obstruction."""
    gens = _generators(system)
    group = gens[0].group
    hull = lie_hull(gens)
    commutative = all(
        bracket(x, y).norm() <= 1e-12 for i, x in enumerate(hull) for y in hull[i + 1:]
    )
    if len(hull) == group.m:
        kind = "HormanderHullFull"
    elif not group.abelian and commutative:
        kind = "CommutativeHullObstruction"
    else:
        kind = "Neither"
    return HullCheck(kind, len(hull), group.m, commutative)


@dataclass(frozen=True)
class LowerBoundCheck:
    s_min_sq: float  # smallest eigenvalue of M^T M
    n_checked: int
    n_violations: int
    first_violation: Fraction | None


def _positive_definite(A) -> bool:
    """Exact test by Gaussian elimination on a symmetric rational matrix."""
    A = [list(r) for r in A]
    k = len(A)
    for i in range(k):
        if A[i][i] <= 0:
            return False
        for r in range(i + 1, k):
            f = A[r][i] / A[i][i]
            for c in range(i, k):
                A[r][c] -= f * A[i][c]
    return True


def lower_bound_check(minima: Sequence[ShellMinimum], rows) -> LowerBoundCheck:
    """Check sigma_min(shell)^2 >= s_min(M)^2 * lambda exactly for constant rational rows M.

    sigma^2 / lambda >= s_min^2 holds iff M^T M - (sigma^2 / lambda) I is not
    positive definite.
    """
    M = [[Fraction(c) for c in r] for r in rows]
    m = len(M[0])
    G = [[sum(r[i] * r[j] for r in M) for j in range(m)] for i in range(m)]
    s2 = float(np.linalg.eigvalsh(np.array(G, dtype=float)).min())
    bad, first, n = 0, None, 0
    for mm in minima:
        if mm.lam == 0:
            continue
        if mm.sigma_sq is None:
            raise ValueError("exact shell minima required")
        n += 1
        t = mm.sigma_sq / mm.lam
        if _positive_definite([[G[i][j] - (t if i == j else 0) for j in range(m)] for i in range(m)]):
            bad += 1
            first = mm.lam if first is None else first
    return LowerBoundCheck(s2, n, bad, first)
