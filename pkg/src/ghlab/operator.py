"""Sum-of-squares operators P = Q - sum_l (a_l(t, X) + W_l)^2 on T^n x G.

Everything acts on ``FourierData``: multiplication by a trig polynomial is a
convolution in tau, d/dt_k is the multiplier i tau_k, and a left-invariant
field acts shell by shell.  With rational coefficients on a torus G the
arithmetic is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

from .fields import CoefficientMap, LieElement, SystemSpec, commutativity_check
from .fourier import FourierData, mu_of
from .ghcheck import ZERO_TOL, fit_log_power, gh_verdict, shell_minima
from .scalars import QI, abs2, conj, log_fraction
from .spectral import GroupSpec, SU2Mode, enumerate_shells, lattice_points, rep_block
from .trig import TrigPoly

__all__ = [
    "SkewSymmetryError",
    "TorusField",
    "ConstantForm",
    "FieldTerm",
    "OperatorSpec",
    "apply_Y",
    "apply_Q",
    "apply_operator",
    "partial_projection_G",
    "partial_projection_T",
    "energy_identity_residual",
    "Ellipticity",
    "tildeP_ellipticity",
    "ProbeReport",
    "final_inequality_probe",
    "SmoothnessReport",
    "classify_smoothness",
    "ConeSplitReport",
    "cone_split_check",
    "PoincareEstimate",
    "poincare_estimate",
    "GraphNormReport",
    "graph_norm_bound",
    "ProductCheck",
    "product_check",
    "random_fourier",
    "random_operator",
]


class SkewSymmetryError(ValueError):
    """A torus vector field is not divergence-free, hence not skew-symmetric."""


# ---------------------------------------------------------------------------
# operator data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorusField:
    """W = sum_k b_k(t) d/dt_k with trig-polynomial coefficients."""

    coeffs: tuple

    def __post_init__(self):
        cs = tuple(self.coeffs)
        if not cs:
            raise ValueError("a torus field needs n >= 1 coefficients")
        if any(c.n != len(cs) for c in cs):
            raise ValueError("coefficient count must equal the torus dimension")
        if len({c.exact for c in cs}) != 1:
            raise TypeError("coefficients mix exact and floating scalars")
        for k, c in enumerate(cs):
            if not c.is_real():
                raise ValueError(f"coefficient b_{k + 1} is not real-valued")
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def constant(cls, vector, exact=True):
        n = len(vector)
        return cls(tuple(TrigPoly.constant(n, v, exact) for v in vector))

    @classmethod
    def zero(cls, n, exact=True):
        return cls(tuple(TrigPoly(n, {}, exact) for _ in range(n)))

    @property
    def n(self):
        return len(self.coeffs)

    @property
    def exact(self):
        return self.coeffs[0].exact

    def divergence(self) -> TrigPoly:
        out = TrigPoly(self.n, {}, self.exact)
        for k, c in enumerate(self.coeffs):
            out = out + c.derivative(k)
        return out

    def is_skew_symmetric(self, tol=1e-12) -> bool:
        div = self.divergence()
        if self.exact:
            return div.is_zero()
        return all(abs(v) <= tol for v in div.coeffs.values())

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs)

    def is_constant(self):
        return all(c.is_constant() for c in self.coeffs)

    def constant_vector(self):
        if not self.is_constant():
            raise ValueError("field is not constant")
        vals = []
        for c in self.coeffs:
            v = c.constant_term()
            vals.append(v.re if isinstance(v, QI) else complex(v).real)
        return tuple(vals)

    def apply(self, f: FourierData) -> FourierData:
        out = FourierData(f.group, f.n, {}, f.exact)
        for k, c in enumerate(self.coeffs):
            if not c.is_zero():
                out = out + f.dt(k).multiply(c)
        return out

    def apply_poly(self, psi: TrigPoly) -> TrigPoly:
        out = TrigPoly(self.n, {}, psi.exact)
        for k, c in enumerate(self.coeffs):
            cc = c if c.exact == psi.exact else c.to_float()
            out = out + cc * psi.derivative(k)
        return out

    def to_float(self):
        return TorusField(tuple(c.to_float() for c in self.coeffs))


@dataclass(frozen=True)
class ConstantForm:
    """Q with symbol tau^T A tau for a symmetric positive semidefinite matrix A."""

    matrix: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.matrix)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("form matrix must be square")
        if any(rows[i][j] != rows[j][i] for i in range(n) for j in range(n)):
            raise ValueError("form matrix must be symmetric")
        object.__setattr__(self, "matrix", rows)
        if not _is_psd(rows):
            raise ValueError("constant form is not positive semidefinite")

    def symbol(self, tau):
        n = len(self.matrix)
        return sum(self.matrix[i][j] * tau[i] * tau[j] for i in range(n) for j in range(n))


def _is_psd(rows) -> bool:
    exact = all(isinstance(x, (int, Fraction)) for r in rows for x in r)
    if exact:
        M = sympy.Matrix([[sympy.Rational(Fraction(x).numerator, Fraction(x).denominator) for x in r] for r in rows])
        return M.is_positive_semidefinite
    return float(np.linalg.eigvalsh(np.array(rows, dtype=float)).min()) >= -1e-12


@dataclass(frozen=True)
class FieldTerm:
    """Y = a(t, X) + W with a: T^n -> g and W a torus field."""

    a: CoefficientMap
    W: TorusField

    def __post_init__(self):
        if self.a.n != self.W.n:
            raise ValueError("a and W live on tori of different dimensions")


@dataclass(frozen=True)
class OperatorSpec:
    group: GroupSpec
    n: int
    Q: object = "laplacian"  # "laplacian" | "zero" | ConstantForm
    fields: tuple = ()
    remainder: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        object.__setattr__(self, "remainder", tuple(self.remainder))
        if not (self.Q in ("laplacian", "zero") or isinstance(self.Q, ConstantForm)):
            raise ValueError(f"unknown Q {self.Q!r}")
        if isinstance(self.Q, ConstantForm) and len(self.Q.matrix) != self.n:
            raise ValueError("form matrix does not match the torus dimension")
        for label, terms in (("W", self.fields), ("V", self.remainder)):
            for i, term in enumerate(terms):
                if term.a.group != self.group:
                    raise ValueError(f"coefficient map {i + 1} lives on {term.a.group}, not {self.group}")
                if term.W.n != self.n:
                    raise ValueError(f"{label}_{i + 1} lives on T^{term.W.n}, not T^{self.n}")
                if not term.W.is_skew_symmetric():
                    raise SkewSymmetryError(
                        f"{label}_{i + 1} violates skew-symmetry: its divergence {term.W.divergence()} is not zero")

    @property
    def exact(self) -> bool:
        terms = self.fields + self.remainder
        return all(t.a.exact and t.W.exact for t in terms)

    def is_constant_coefficient(self) -> bool:
        return all(t.a.is_constant() and t.W.is_constant() for t in self.fields + self.remainder)

    def system(self) -> SystemSpec:
        return SystemSpec(tuple(t.a for t in self.fields), allow_zero=True)


# ---------------------------------------------------------------------------
# application
# ---------------------------------------------------------------------------

def apply_Y(term: FieldTerm, f: FourierData) -> FourierData:
    """(a(t, X) + W) f."""
    out = term.W.apply(f)
    for j, comp in enumerate(term.a.components):
        if comp.is_zero():
            continue
        e = LieElement.basis(f.group, j + 1)
        out = out + f.apply_lie(e).multiply(comp)
    return out


def apply_Q(Q, f: FourierData) -> FourierData:
    if Q == "laplacian":
        return f.laplacian_T()
    if Q == "zero":
        return FourierData(f.group, f.n, {}, f.exact)
    return f._new({k: v * (QI(Fraction(Q.symbol(k[0])), 0) if f.exact else float(Q.symbol(k[0])))
                   for k, v in f.coeffs.items()})


def apply_operator(P: OperatorSpec, f: FourierData) -> FourierData:
    """P f, exact when both P and f are exact; R is added as -(b + V)^2."""
    if f.group != P.group or f.n != P.n:
        raise ValueError("data and operator live on different products")
    if f.exact and not P.exact:
        raise TypeError("exact data with floating operator coefficients")
    out = apply_Q(P.Q, f)
    for term in P.fields + P.remainder:
        out = out - apply_Y(term, apply_Y(term, f))
    return out


def partial_projection_G(f: FourierData, lam) -> FourierData:
    return f.projection_G(lam)


def partial_projection_T(f: FourierData, mu) -> FourierData:
    return f.projection_T(mu)


def energy_identity_residual(P: OperatorSpec, psi: FourierData):
    """<P psi, psi> - <Q psi, psi> - sum_l ||Y_l psi||^2 (zero for skew-symmetric W_l)."""
    if P.remainder:
        raise ValueError("energy identity is stated for P without the remainder term")
    if len(psi.g_eigenvalues()) > 1:
        raise ValueError("psi must be supported on a single G-eigenvalue")
    res = apply_operator(P, psi).inner(psi) - apply_Q(P.Q, psi).inner(psi)
    for term in P.fields:
        res = res - apply_Y(term, psi).norm2()
    return res


def random_fourier(group: GroupSpec, n: int, rng, tau_radius: int = 2, lam=None, modes=None,
                   exact: bool = False, density: float = 1.0, den: int = 4) -> FourierData:
    """Random data on the box |tau|_inf <= tau_radius times the given G-modes."""
    if modes is None:
        if lam is None:
            raise ValueError("give lam or modes")
        shell = [s for s in enumerate_shells(group, lam) if s.eigenvalue == Fraction(lam)]
        if not shell:
            raise ValueError(f"{lam} is not an eigenvalue of {group}")
        modes = shell[0].modes
    axis = range(-tau_radius, tau_radius + 1)
    taus = [tuple(int(v) for v in t) for t in np.array(np.meshgrid(*([list(axis)] * n), indexing="ij")).reshape(n, -1).T]
    coeffs = {}
    for tau in taus:
        for mode in modes:
            if rng.random() > density:
                continue
            if exact:
                re = Fraction(int(rng.integers(-den * 2, den * 2 + 1)), den)
                im = Fraction(int(rng.integers(-den * 2, den * 2 + 1)), den)
                coeffs[(tau, tuple(mode))] = QI(re, im)
            else:
                coeffs[(tau, tuple(mode))] = complex(rng.standard_normal(), rng.standard_normal())
    return FourierData(group, n, coeffs, exact)


def _random_real_poly(n, rng, band, exact, den):
    coeffs = {}
    for tau in np.ndindex(*([2 * band + 1] * n)):
        tau = tuple(int(x) - band for x in tau)
        neg = tuple(-x for x in tau)
        if neg in coeffs:
            coeffs[tau] = conj(coeffs[neg])
            continue
        if exact:
            re = Fraction(int(rng.integers(-2 * den, 2 * den + 1)), den)
            im = Fraction(int(rng.integers(-2 * den, 2 * den + 1)), den) if any(tau) else Fraction(0)
            coeffs[tau] = QI(re, im)
        else:
            coeffs[tau] = complex(rng.standard_normal(), rng.standard_normal() if any(tau) else 0.0)
    return TrigPoly(n, coeffs, exact)


def random_operator(group: GroupSpec, n: int, rng, n_fields: int = 2, band: int = 1, exact: bool = True,
                    den: int = 4) -> OperatorSpec:
    """P = Delta_T - sum (a_l + W_l)^2 with random real trig-polynomial a_l and skew-symmetric W_l.

    W_l has constant coefficients, which keeps it divergence-free.
    """
    fields = []
    for _ in range(n_fields):
        comps = tuple(_random_real_poly(n, rng, band, exact, den) for _ in range(group.m))
        a = CoefficientMap(group, comps)
        if exact:
            w = [Fraction(int(rng.integers(-2 * den, 2 * den + 1)), den) for _ in range(n)]
        else:
            w = [float(rng.standard_normal()) for _ in range(n)]
        fields.append(FieldTerm(a, TorusField.constant(w, exact)))
    return OperatorSpec(group, n, "laplacian", tuple(fields))


# ---------------------------------------------------------------------------
# ellipticity of the T-part
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ellipticity:
    elliptic: bool
    witness_tau: tuple | None
    min_eigenvalue: float
    exact: bool
    witness_t: tuple | None = None


def _q_matrix(P, exact):
    n = P.n
    if P.Q == "laplacian":
        return [[Fraction(int(i == j)) if exact else float(i == j) for j in range(n)] for i in range(n)]
    if P.Q == "zero":
        return [[Fraction(0) if exact else 0.0 for _ in range(n)] for _ in range(n)]
    return [[Fraction(x) if exact else float(x) for x in r] for r in P.Q.matrix]


def tildeP_ellipticity(P: OperatorSpec, grid: int = 32) -> Ellipticity:
    """Positivity of q(tau) + sum_l (w_l(t) . tau)^2 for tau != 0.

    Constant coefficients are decided exactly (rational) or by eigenvalues;
    otherwise the principal symbol is sampled on a uniform t-grid.
    """
    terms = P.fields + P.remainder
    const = all(t.W.is_constant() for t in terms)
    exact = const and all(t.W.exact for t in terms) and (
        not isinstance(P.Q, ConstantForm) or all(isinstance(x, (int, Fraction)) for r in P.Q.matrix for x in r))
    if const:
        A = _q_matrix(P, exact)
        for t in terms:
            w = t.W.constant_vector()
            for i in range(P.n):
                for j in range(P.n):
                    A[i][j] += w[i] * w[j]
        if exact:
            M = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in A])
            if M.is_positive_definite:
                ev = min(float(e) for e in M.eigenvals())
                return Ellipticity(True, None, ev, True)
            null = M.nullspace()[0]
            den = math.lcm(*[int(sympy.fraction(x)[1]) for x in null])
            tau = tuple(int(x * den) for x in null)
            g = math.gcd(*tau) or 1
            return Ellipticity(False, tuple(v // g for v in tau), 0.0, True)
        ev, vec = np.linalg.eigh(np.array(A, dtype=float))
        ok = ev[0] > 1e-12
        return Ellipticity(bool(ok), None if ok else tuple(float(x) for x in vec[:, 0]), float(ev[0]), False)
    pts = 2 * np.pi * np.stack(np.meshgrid(*([np.arange(grid) / grid] * P.n), indexing="ij"), -1).reshape(-1, P.n)
    base = np.array(_q_matrix(P, False), dtype=float)
    worst = (math.inf, None, None)
    for t in pts:
        A = base.copy()
        for term in terms:
            w = np.array([c(t).real for c in term.W.coeffs])
            A += np.outer(w, w)
        ev, vec = np.linalg.eigh(A)
        if ev[0] < worst[0]:
            worst = (float(ev[0]), tuple(float(x) for x in vec[:, 0]), tuple(float(x) for x in t))
    ok = worst[0] > 1e-12
    return Ellipticity(bool(ok), None if ok else worst[1], worst[0], False, None if ok else worst[2])


# ---------------------------------------------------------------------------
# the final inequality, probed per G-shell
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeReport:
    lams: tuple
    worst_ratios: tuple
    C: float
    rho: float
    rho_half: float
    quality: float
    all_positive: bool
    seed: int
    trials: int
    exact_path: bool
    warnings: tuple = ()
    max_imag: float = 0.0


def _hypothesis_warnings(P: OperatorSpec, lam_max) -> list[str]:
    out = []
    for i, t in enumerate(P.fields):
        if not t.a.is_zero() and not commutativity_check(t.a):
            out.append(f"range of a_{i + 1} is not commutative")
    if not tildeP_ellipticity(P).elliptic:
        out.append("tilde-P is not elliptic")
    maps = [t.a for t in P.fields if not t.a.is_zero()]
    if maps:
        report = gh_verdict(shell_minima(SystemSpec(tuple(maps)), lam_max))
        if report.verdict != "ConsistentGH":
            out.append(f"system verdict is {report.verdict}")
    else:
        out.append("no fields")
    return out


def _exact_torus_probe(P: OperatorSpec, lam_max):
    """min over shell modes xi and tau in Z of q(tau) + sum_l (a_l . xi + w_l tau)^2 (n = 1)."""
    m = P.group.m
    pts = lattice_points(m, lam_max)
    lam = (pts * pts).sum(axis=1)
    terms = P.fields + P.remainder
    a = np.array([[float(c) for c in t.a.constant_value().coords] for t in terms]).reshape(len(terms), m)
    w = np.array([float(t.W.constant_vector()[0]) for t in terms])
    q = float(_q_matrix(P, False)[0][0])
    s = pts.astype(float) @ a.T  # (N, L)
    alpha = q + float((w * w).sum())
    beta = s @ w
    gamma = (s * s).sum(axis=1)
    if alpha > 0:
        tstar = -beta / alpha
        cands = [np.floor(tstar), np.ceil(tstar)]
        vals = np.min([alpha * c * c + 2 * beta * c + gamma for c in cands], axis=0)
    else:
        vals = gamma
    order = np.lexsort((vals, lam))
    lam_s = lam[order]
    firsts = np.concatenate(([0], np.flatnonzero(np.diff(lam_s)) + 1))
    out_l, out_v = [], []
    for i in firsts:
        out_l.append(Fraction(int(lam_s[i])))
        out_v.append(float(vals[order[i]]))
    return out_l, out_v


def _sampled_shell(args):
    P, shell, trials, seed, idx, tau_radius = args
    rng = np.random.default_rng([seed, idx])
    worst, max_imag = math.inf, 0.0
    for _ in range(trials):
        psi = random_fourier(P.group, P.n, rng, tau_radius, modes=shell.modes)
        val = apply_operator(P, psi).inner(psi)
        nrm = psi.norm2()
        max_imag = max(max_imag, abs(complex(val).imag) / nrm)
        worst = min(worst, complex(val).real / nrm)
    return worst, max_imag


def final_inequality_probe(P: OperatorSpec, lam_max, trials: int = 8, seed: int = 0, tau_radius: int = 2,
                           exact_path: bool | None = None, check_hypotheses: bool = True) -> ProbeReport:
    """Empirical lower bound of <P psi, psi> / ||psi||^2 on each G-shell with 0 < lambda <= lam_max.

    psi has random complex coefficients on |tau|_inf <= tau_radius and every
    mode of the shell, drawn from ``default_rng([seed, shell index])``.  For
    constant-coefficient operators on T^1 x T^m the per-shell minimum over
    all tau is computed directly instead (``exact_path``).  The fit uses the
    lower envelope in log-log coordinates; ``rho_half`` is the exponent for
    the square root of the form, comparable with a system-level rho.
    """
    from ._parallel import pmap

    warnings = tuple(_hypothesis_warnings(P, min(Fraction(lam_max), 400))) if check_hypotheses else ()
    can_exact = P.group.abelian and P.n == 1 and P.is_constant_coefficient()
    if exact_path is None:
        exact_path = can_exact
    if exact_path and not can_exact:
        raise ValueError("the direct path needs a constant-coefficient operator on T^1 x T^m")
    max_imag = 0.0
    if exact_path:
        lams, vals = _exact_torus_probe(P, lam_max)
        pairs = [(l, v) for l, v in zip(lams, vals) if l > 0]
    else:
        shells = [s for s in enumerate_shells(P.group, lam_max) if s.eigenvalue > 0]
        res = pmap(_sampled_shell, [(P, sh, trials, seed, i, tau_radius) for i, sh in enumerate(shells)])
        pairs = [(sh.eigenvalue, r[0]) for sh, r in zip(shells, res)]
        max_imag = max((r[1] for r in res), default=0.0)
    lams = tuple(l for l, _ in pairs)
    ratios = tuple(v for _, v in pairs)
    positive = all(v > 0 for v in ratios)
    pos = [(l, v) for l, v in pairs if v > 0]
    if len(pos) >= 3:
        C, rho, q, _, _ = fit_log_power([l for l, _ in pos], [math.log(v) for _, v in pos])
    else:
        C, rho, q = math.nan, math.nan, 0.0
    return ProbeReport(lams, ratios, C, rho, rho / 2, q, positive, seed, trials, bool(exact_path),
                       warnings, max_imag)


# ---------------------------------------------------------------------------
# smoothness from block norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothnessReport:
    verdict: str  # ConsistentSmooth | DistributionOrder | Inconclusive
    exponent: float
    quality: float
    local_slopes: tuple
    s_max: float
    n_points: int
    theta: float | None = None

    @property
    def smooth(self) -> bool:
        return self.verdict == "ConsistentSmooth"


def _log_norm_pairs(f) -> list:
    if isinstance(f, FourierData):
        acc = {}
        for (mu, lam), n2 in f.blocks():
            acc[mu + lam] = acc.get(mu + lam, 0) + n2
        out = []
        for L, n2 in sorted(acc.items()):
            out.append((Fraction(L), 0.5 * log_fraction(n2) if isinstance(n2, Fraction) and n2
                        else (0.5 * math.log(n2) if n2 else -math.inf)))
        return out
    return sorted((Fraction(L), float(v)) for L, v in f)


def _log1p_exact(L: Fraction) -> float:
    return log_fraction(1 + L)


def classify_smoothness(f, s_max: float = 8.0, min_quality: float = 0.9, accel: float = 0.05) -> SmoothnessReport:
    """Compare block norms with powers of (1 + mu + lambda).

    ``f`` is FourierData or a list of ``(mu + lambda, log norm)`` pairs.
    ConsistentSmooth: the tail decays faster than (1 + mu + lambda)^(-s_max),
    or vanishes, or the last local log-log slopes are negative and keep
    dropping by more than ``accel`` (super-polynomial trend).
    DistributionOrder: a clean power law (R^2 >= min_quality) with the fitted
    exponent.  Inconclusive otherwise.
    """
    pairs = _log_norm_pairs(f)
    if len(pairs) < 3:
        raise ValueError("need block norms at 3 or more distinct values of mu + lambda")
    half = len(pairs) // 2
    tail = pairs[half:]
    if all(v == -math.inf for _, v in tail):
        return SmoothnessReport("ConsistentSmooth", -math.inf, 1.0, (), s_max, len(pairs))
    pts = [(L, v) for L, v in pairs if v > -math.inf]
    x = np.array([_log1p_exact(L) for L, _ in pts])
    y = np.array([v for _, v in pts])
    slopes = tuple(float((y[i + 1] - y[i]) / (x[i + 1] - x[i])) for i in range(len(x) - 1) if x[i + 1] > x[i])
    if len(pts) >= 2:
        A = np.vstack([np.ones_like(x), x]).T
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        res = float(((y - A @ coef) ** 2).sum())
        tot = float(((y - y.mean()) ** 2).sum())
        quality = 1.0 if tot <= 1e-300 else 1 - res / tot
        expo = float(coef[1])
    else:
        quality, expo = 0.0, math.nan
    tx = np.array([_log1p_exact(L) for L, v in tail if v > -math.inf])
    ty = np.array([v for _, v in tail if v > -math.inf])
    tail_slope = float(np.polyfit(tx, ty, 1)[0]) if len(tx) >= 2 and np.ptp(tx) > 0 else math.nan
    last = slopes[-3:]
    accelerating = len(last) >= 3 and all(s < 0 for s in last) and all(
        b < a - accel for a, b in zip(last, last[1:]))
    if (not math.isnan(tail_slope) and tail_slope <= -s_max) or accelerating:
        verdict = "ConsistentSmooth"
    elif quality >= min_quality and len(pts) >= 3:
        verdict = "DistributionOrder"
    else:
        verdict = "Inconclusive"
    return SmoothnessReport(verdict, expo, quality, slopes, s_max, len(pairs))


@dataclass(frozen=True)
class ConeSplitReport:
    verdict: str  # SmoothConsistent | Inconclusive
    h1: bool
    h2: bool
    combined: bool
    C1: float
    C2: float
    exponent: float
    theta: float


def _bounded_tail(vals) -> tuple[bool, float]:
    """Max of the data and whether the second half never exceeds the first half's max."""
    if not vals:
        return True, 0.0
    half = max(1, len(vals) // 2)
    head, tail = max(vals[:half]), max(vals[half:], default=0.0)
    return tail <= head * (1 + 1e-9), max(vals)


def cone_split_check(f: FourierData, theta: float, s: float) -> ConeSplitReport:
    """Decay of the G-projections plus decay on the cone 1 + lambda <= (1 + mu)^theta.

    If both hold at exponent s, blocks outside the cone obey
    ||block|| <= C1 (1 + mu + lambda)^(-s theta / 2), using 1 + mu + lambda <= (1 + lambda)^(2 / theta).
    """
    if not (0 < theta < 1):
        raise ValueError("theta must lie in (0, 1)")
    if s <= 0:
        raise ValueError("s must be positive")
    blocks = [((mu, lam), float(n2) ** 0.5) for (mu, lam), n2 in f.blocks()]
    by_lam = {}
    for (mu, lam), nb in blocks:
        by_lam[lam] = by_lam.get(lam, 0.0) + nb * nb
    g_vals = [math.sqrt(v) * (1 + float(lam)) ** s for lam, v in sorted(by_lam.items())]
    h1, C1 = _bounded_tail(g_vals)
    inside = sorted(((mu + lam), nb) for (mu, lam), nb in blocks if 1 + lam <= (1 + mu) ** theta)
    c_vals = [nb * (1 + float(L)) ** s for L, nb in inside]
    h2, C2 = _bounded_tail(c_vals)
    expo = s * theta / 2
    combined = False
    if h1 and h2:
        combined = True
        for (mu, lam), nb in blocks:
            if 1 + lam <= (1 + mu) ** theta:
                continue
            total = 1 + float(mu + lam)
            if total > (1 + float(lam)) ** (2 / theta) * (1 + 1e-12):
                combined = False
                break
            if nb > C1 * total ** (-expo) * (1 + 1e-9):
                combined = False
                break
    verdict = "SmoothConsistent" if combined else "Inconclusive"
    return ConeSplitReport(verdict, h1, h2, combined, C1, C2, expo, theta)


# ---------------------------------------------------------------------------
# auxiliary inequalities on tori
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoincareEstimate:
    C: float
    C_validation: float
    delta: float
    seed: int
    trials: int
    degree: int

    @property
    def stable(self) -> bool:
        return abs(self.C_validation - self.C) <= 0.2 * self.C


def _random_set(rng, delta, max_intervals):
    k = int(rng.integers(1, max_intervals + 1))
    vol = delta if rng.random() < 0.5 else delta + (1 - delta) * rng.random()
    lengths = rng.dirichlet(np.ones(k)) * vol * 2 * np.pi
    gaps = rng.dirichlet(np.ones(k)) * (1 - vol) * 2 * np.pi
    start = rng.random() * 2 * np.pi
    out, pos = [], start
    for ln, gp in zip(lengths, gaps):
        out.append((pos, pos + ln))
        pos += ln + gp
    return out


def _gram_on_set(intervals, degree):
    ks = np.arange(-degree, degree + 1)
    diff = ks[:, None] - ks[None, :]
    G = np.zeros(diff.shape, dtype=complex)
    for a, b in intervals:
        with np.errstate(divide="ignore", invalid="ignore"):
            off = (np.exp(1j * diff * b) - np.exp(1j * diff * a)) / (1j * diff)
        G += np.where(diff == 0, b - a, off)
    return G / (2 * np.pi)


def _poincare_sample(delta, trials, seed, degree, max_intervals):
    rng = np.random.default_rng(seed)
    ks = np.arange(-degree, degree + 1)
    D = np.diag(ks.astype(float) ** 2)
    best = 0.0
    for _ in range(trials):
        A = _random_set(rng, delta, max_intervals)
        M = _gram_on_set(A, degree) + D
        M = (M + M.conj().T) / 2
        lam_min = float(np.linalg.eigvalsh(M)[0])
        best = max(best, 1.0 / lam_min)
    return best


def poincare_estimate(delta: float, trials: int = 400, seed: int = 0, degree: int = 6,
                      max_intervals: int = 3) -> PoincareEstimate:
    """Empirical C(delta) with ||psi||^2 <= C (||psi||^2_{L^2(A)} + ||psi'||^2) on T^1.

    Sets A are unions of at most ``max_intervals`` disjoint arcs with
    normalised measure >= delta.  For each A the supremum over trig
    polynomials of degree <= ``degree`` is exact: it is 1 / lambda_min of the
    Hermitian form ``Gram_A + diag(k^2)``.  The estimate is re-run on a fresh
    seed (seed + 1) for validation.
    """
    if not (0 < delta <= 1):
        raise ValueError("delta must lie in (0, 1]")
    C = _poincare_sample(delta, trials, seed, degree, max_intervals)
    C2 = _poincare_sample(delta, trials, seed + 1, degree, max_intervals)
    return PoincareEstimate(C, C2, delta, seed, trials, degree)


def poincare_ratio(psi: TrigPoly, intervals) -> float:
    """||psi||^2 / (||psi||^2_{L^2(A)} + ||psi'||^2) for a 1-D trig polynomial."""
    if psi.n != 1:
        raise ValueError("1-D only")
    degree = max(psi.bandwidth(), 1)
    ks = np.arange(-degree, degree + 1)
    c = np.array([complex(psi.coeffs.get((int(k),), 0)) for k in ks])
    G = _gram_on_set(intervals, degree)
    num = float(np.vdot(c, c).real)
    den = float(np.vdot(c, G @ c).real + (np.abs(c) ** 2 * ks ** 2).sum())
    return num / den


@dataclass(frozen=True)
class GraphNormReport:
    max_ratio: float
    bound: float
    skipped: int
    trials: int
    seed: int


def graph_norm_bound(W: TorusField, trials: int = 200, seed: int = 0, degree: int = 6) -> GraphNormReport:
    """max ||W psi|| / ||d psi|| over random trig polynomials psi; constants are skipped.

    ``bound`` is sqrt(sum_k (sum |coefficients of b_k|)^2), a sup-norm bound
    for |b(t)|.
    """
    rng = np.random.default_rng(seed)
    Wf = W.to_float()
    n = W.n
    best, skipped = 0.0, 0
    for i in range(trials):
        if i == 0:
            psi = TrigPoly.constant(n, 1.0, exact=False)
        else:
            coeffs = {}
            d = int(rng.integers(1, degree + 1))
            for tau in np.ndindex(*([2 * d + 1] * n)):
                tau = tuple(int(x) - d for x in tau)
                coeffs[tau] = complex(rng.standard_normal(), rng.standard_normal())
            psi = TrigPoly(n, coeffs, exact=False)
        grad2 = sum(psi.derivative(k).norm2() for k in range(n))
        if grad2 <= 1e-300:
            skipped += 1
            continue
        best = max(best, math.sqrt(Wf.apply_poly(psi).norm2() / grad2))
    bound = math.sqrt(sum(c.sup_bound() ** 2 for c in W.coeffs))
    return GraphNormReport(best, bound, skipped, trials, seed)


# ---------------------------------------------------------------------------
# product-level checks for mostly-constant operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductCheck:
    mode: str
    n_prime: int
    hypotheses: tuple  # ((name, bool), ...)
    verdict: str
    rho: float
    C: float
    points: int


def _leading_constant(P, need_zero_w):
    k = 0
    for t in P.fields:
        if not t.a.is_constant() or not t.W.is_constant() or (need_zero_w and not t.W.is_zero()):
            break
        k += 1
    return k


def _block_minima(P, n_prime, mu_max, lam_max):
    """min over E_mu x E_lambda of (sum_l ||(L_l + W_l) phi||^2)^(1/2) for the leading fields."""
    terms = P.fields[:n_prime]
    Ls = [t.a.constant_value() for t in terms]
    ws = [np.array([float(x) for x in t.W.constant_vector()]) for t in terms]
    taus = lattice_points(P.n, mu_max)
    mus = (taus * taus).sum(axis=1)
    out = {}
    if P.group.kind == "torus":
        xis = lattice_points(P.group.m, lam_max)
        lams = (xis * xis).sum(axis=1)
        A = np.array([[float(c) for c in L.coords] for L in Ls])
        sx = xis.astype(float) @ A.T  # (Nx, K)
        for tau, mu in zip(taus, mus):
            st = np.array([w @ tau for w in ws])
            vals = np.sqrt(((sx + st) ** 2).sum(axis=1))
            for lam in np.unique(lams):
                key = (int(mu), int(lam))
                v = float(vals[lams == lam].min())
                out[key] = min(out.get(key, math.inf), v)
    else:
        for sh in enumerate_shells(P.group, lam_max):
            tj = sh.two_j
            blocks = [rep_block(L.coords, tj) for L in Ls]
            for tau, mu in zip(taus, mus):
                stack = np.vstack([b + 1j * float(w @ tau) * np.eye(tj + 1) for b, w in zip(blocks, ws)])
                v = float(np.linalg.svd(stack, compute_uv=False)[-1])
                key = (int(mu), sh.eigenvalue)
                out[key] = min(out.get(key, math.inf), v)
    return out


def product_check(P: OperatorSpec, mode: str, mu_max=16, lam_max=64, n_prime: int | None = None) -> ProductCheck:
    """Hypothesis and inequality checks for operators with leading constant fields.

    ``mode="commuting-w"``: leading terms L_l + W_l with constant L_l and constant W_l
    (so W_l commutes with the T-Laplacian); the block minima over
    E_mu x E_lambda are fitted against (1 + mu + lambda).
    ``mode="pure-g"``: leading terms L_l with W_l = 0; the system {L_l} is
    tested on G alone.
    """
    if mode not in ("commuting-w", "pure-g"):
        raise ValueError("mode must be 'commuting-w' or 'pure-g'")
    if n_prime is None:
        n_prime = _leading_constant(P, mode == "pure-g")
    if n_prime < 1:
        raise ValueError("no leading constant fields")
    hyp = []
    q_psd = P.Q in ("laplacian", "zero") or isinstance(P.Q, ConstantForm)
    hyp.append(("Q positive semidefinite", q_psd))
    rest = P.fields if mode == "commuting-w" else P.fields[n_prime:]
    sub = OperatorSpec(P.group, P.n, P.Q, rest)
    hyp.append(("tilde-P elliptic", tildeP_ellipticity(sub).elliptic))
    lead = P.fields[:n_prime]
    if mode == "commuting-w":
        hyp.append(("leading W commute with the T-Laplacian", all(t.W.is_constant() for t in lead)))
        mins = _block_minima(P, n_prime, mu_max, lam_max)
        pts = sorted((mu + lam, v) for (mu, lam), v in mins.items() if mu + lam > 0)
        best = {}
        for L, v in pts:
            best[L] = min(best.get(L, math.inf), v)
        items = sorted(best.items())
        zero = [L for L, v in items if v <= ZERO_TOL]
        if zero:
            hyp.append(("product system bound", False))
            return ProductCheck(mode, n_prime, tuple(hyp), "FailZeroSymbol", math.nan, 0.0, len(items))
        C, rho, q, _, _ = fit_log_power([Fraction(L) for L, _ in items], [math.log(v) for _, v in items])
        ok = q >= 0.8
        hyp.append(("product system bound", ok))
        verdict = "ConsistentGH" if all(h for _, h in hyp) else "Inconclusive"
        return ProductCheck(mode, n_prime, tuple(hyp), verdict, rho, C, len(items))
    hyp.append(("leading W vanish", all(t.W.is_zero() for t in lead)))
    report = gh_verdict(shell_minima([t.a.constant_value() for t in lead], lam_max, P.group))
    hyp.append(("system GH on G", report.verdict == "ConsistentGH"))
    verdict = "ConsistentGH" if all(h for _, h in hyp) else report.verdict if report.verdict != "ConsistentGH" else "Inconclusive"
    rho = report.fit.rho if report.fit else math.nan
    C = report.fit.C if report.fit else 0.0
    return ProductCheck(mode, n_prime, tuple(hyp), verdict, rho, C, len(report.minima))
