"""YAML problem files.

A problem file names the group, the torus T^n, a system of coefficient
maps and/or an operator, and the analysis parameters.  Coefficients are
explicit frequency tables, never expressions.  Example::

    name: rational-pair
    seed: 0
    group: {kind: torus, dim: 2}
    T: {dim: 1}
    system:
      - ["1", "1/2"]          # a_1 = X_1 + (1/2) X_2
      - ["1/3", "1"]
    analysis: {lambda_max: 10000, radius: 500}

A coefficient is a rational (``3``, ``"1/2"``, ``0.25``), an irrational
constant (``{surd: [a, b, d]}`` for a + b sqrt(d), ``{liouville: {base: 10}}``,
``{decimal: "3.14159"}``), or a table ``{"k1,...,kn": value}`` with complex
values written ``[re, im]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import yaml

from .diophantine import DecimalLiteral, LiouvilleSeries, NsaFamily, QuadraticSurd, RealSpec, Rational
from .fields import CoefficientMap, SystemSpec, ZeroMapError
from .operator import ConstantForm, FieldTerm, OperatorSpec, SkewSymmetryError, TorusField
from .scalars import QI
from .spectral import GroupSpec
from .trig import TrigPoly

__all__ = ["SpecError", "ProblemFile", "parse_spec", "load_spec", "DEFAULT_ANALYSIS"]


class SpecError(ValueError):
    """A problem file violates the schema or an invariant."""


DEFAULT_ANALYSIS = {
    "lambda_max": 400,
    "radius": 100,
    "s": 5,
    "min_witnesses": 3,
    "min_quality": 0.8,
    "lambda_0": None,
    "trials": 8,
    "tau_radius": 2,
    "theta": 0.5,
    "B": "1/4",
    "M": 1,
    "K": 20,
    "cf_depth": 10,
    "liouville_order": 6,
    "product_mode": None,
    "mu_max": 16,
    "delta": "1/2",
    "poincare_trials": 400,
    "graph_trials": 200,
    "energy_trials": 20,
    "probe_lambda_max": None,
}

_TOP_KEYS = {"name", "seed", "group", "T", "system", "operator", "analysis"}


@dataclass(frozen=True)
class ProblemFile:
    name: str
    seed: int | None
    group: GroupSpec
    n: int
    system_rows: tuple | None  # raw component specs per field
    system: SystemSpec | None
    family: NsaFamily | None
    operator: OperatorSpec | None
    analysis: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)


def _fail(path, msg):
    raise SpecError(f"{path}: {msg}")


def _rational(x, path) -> Fraction:
    if isinstance(x, bool):
        _fail(path, "booleans are not numbers")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError:
            _fail(path, f"cannot read {x!r} as a rational")
    _fail(path, f"expected a rational, got {x!r}")


def _real(x, path) -> RealSpec:
    if isinstance(x, dict):
        if len(x) != 1:
            _fail(path, "an irrational constant needs exactly one key")
        (kind, val), = x.items()
        if kind == "surd":
            if not (isinstance(val, list) and len(val) == 3):
                _fail(path, "surd needs [a, b, d]")
            d = val[2]
            if not isinstance(d, int) or d < 0:
                _fail(path, "surd radicand must be a non-negative integer")
            return QuadraticSurd(_rational(val[0], path), _rational(val[1], path), d)
        if kind == "golden":
            return QuadraticSurd.golden()
        if kind == "liouville":
            val = val or {}
            return LiouvilleSeries(int(val.get("base", 10)), int(val.get("truncation", 9)))
        if kind == "decimal":
            return DecimalLiteral(str(val))
        _fail(path, f"unknown constant kind {kind!r}")
    return Rational(_rational(x, path))


def _freq(key, n, path) -> tuple:
    if isinstance(key, int):
        parts = [key]
    else:
        parts = [p for p in str(key).replace("(", "").replace(")", "").split(",") if p.strip()]
    try:
        tau = tuple(int(p) for p in parts)
    except ValueError:
        _fail(path, f"bad frequency {key!r}")
    if len(tau) != n:
        _fail(path, f"frequency {key!r} is not in Z^{n} (dimension mismatch)")
    return tau


def _component(x, n, path):
    """A trig polynomial (exact when possible) or an irrational constant."""
    if isinstance(x, dict) and not any(k in x for k in ("surd", "golden", "liouville", "decimal")):
        coeffs = {}
        for k, v in x.items():
            tau = _freq(k, n, f"{path}[{k}]")
            if isinstance(v, list):
                if len(v) != 2:
                    _fail(f"{path}[{k}]", "complex values are [re, im]")
                coeffs[tau] = QI(_rational(v[0], path), _rational(v[1], path))
            else:
                coeffs[tau] = QI(_rational(v, path), 0)
        poly = TrigPoly(n, coeffs, exact=True)
        if not poly.is_real():
            _fail(path, "coefficient table is not conjugate-symmetric (c(-k) must equal conj(c(k)))")
        return poly, None
    r = _real(x, path)
    e = r.exact()
    if isinstance(e, Fraction):
        return TrigPoly.constant(n, e, True), r
    return None, r


def _coefficient_map(entry, group, n, path):
    if not isinstance(entry, list):
        _fail(path, "a coefficient map is a list with one component per basis direction")
    if len(entry) != group.m:
        _fail(path, f"{group} needs {group.m} components, got {len(entry)} (dimension mismatch)")
    polys, reals = [], []
    for j, comp in enumerate(entry):
        poly, real = _component(comp, n, f"{path}[{j}]")
        polys.append(poly)
        reals.append(real)
    if any(p is None for p in polys):  # irrational constants force floating mode
        if any(p is not None and not p.is_constant() for p in polys):
            _fail(path, "irrational constants cannot be mixed with frequency tables")
        vals = [float(r) if p is None else float(r.exact()) for p, r in zip(polys, reals)]
        cmap = CoefficientMap(group, tuple(TrigPoly.constant(n, v, exact=False) for v in vals))
    else:
        cmap = CoefficientMap(group, tuple(polys))
    return cmap, reals


def _torus_field(entry, n, path):
    if not isinstance(entry, list) or len(entry) != n:
        _fail(path, f"W needs {n} components (dimension mismatch)")
    comps = []
    floating = False
    for k, comp in enumerate(entry):
        poly, real = _component(comp, n, f"{path}[{k}]")
        if poly is None:
            floating = True
            poly = TrigPoly.constant(n, float(real), exact=False)
        comps.append(poly)
    if floating:
        comps = [c.to_float() for c in comps]
    return TorusField(tuple(comps))


def _terms(entries, group, n, path):
    if not isinstance(entries, list):
        _fail(path, "expected a list of {a, W} entries")
    out = []
    for i, e in enumerate(entries):
        p = f"{path}[{i}]"
        if not isinstance(e, dict) or "a" not in e:
            _fail(p, "each entry needs 'a' (and optionally 'W')")
        unknown = set(e) - {"a", "W"}
        if unknown:
            _fail(p, f"unknown keys {sorted(unknown)}")
        a, _ = _coefficient_map(e["a"], group, n, f"{p}.a")
        W = _torus_field(e["W"], n, f"{p}.W") if e.get("W") is not None else TorusField.zero(n, a.exact)
        if a.exact != W.exact:
            a = a.to_float() if a.exact else a
            W = W.to_float() if W.exact else W
        if not W.is_skew_symmetric():
            _fail(f"{p}.W", f"skew-symmetry invariant violated: divergence {W.divergence()} is not identically zero")
        out.append(FieldTerm(a, W))
    return tuple(out)


def parse_spec(data: dict) -> ProblemFile:
    """Validate a decoded problem file; raises SpecError naming the first violated invariant."""
    if not isinstance(data, dict):
        raise SpecError("problem file must be a mapping")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise SpecError(f"unknown top-level keys {sorted(unknown)}")
    g = data.get("group")
    if not isinstance(g, dict) or "kind" not in g:
        raise SpecError("group: needs a 'kind'")
    kind = g["kind"]
    if kind == "torus":
        m = g.get("dim")
        if not isinstance(m, int) or m < 1:
            raise SpecError("group.dim: torus dimension must be an integer >= 1")
        group = GroupSpec.torus(m)
    elif kind == "su2":
        group = GroupSpec.su2()
    else:
        raise SpecError(f"group.kind: unknown group kind {kind!r} (expected torus or su2)")
    T = data.get("T", {"dim": 1})
    n = T.get("dim") if isinstance(T, dict) else None
    if not isinstance(n, int) or n < 1:
        raise SpecError("T.dim: torus dimension must be an integer >= 1")
    seed = data.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
        raise SpecError("seed: must be a non-negative integer")
    analysis = dict(DEFAULT_ANALYSIS)
    a_raw = data.get("analysis") or {}
    if not isinstance(a_raw, dict):
        raise SpecError("analysis: must be a mapping")
    bad = set(a_raw) - set(DEFAULT_ANALYSIS)
    if bad:
        raise SpecError(f"analysis: unknown keys {sorted(bad)}")
    analysis.update(a_raw)
    if analysis["theta"] is not None and not (0 < float(analysis["theta"]) < 1):
        raise SpecError("analysis.theta: must lie in (0, 1)")
    if analysis["product_mode"] not in (None, "commuting-w", "pure-g"):
        raise SpecError("analysis.product_mode: expected commuting-w or pure-g")

    system = family = None
    rows = None
    try:
        if data.get("system") is not None:
            entries = data["system"]
            if not isinstance(entries, list) or not entries:
                raise SpecError("system: must be a non-empty list of coefficient maps")
            maps, rows = [], []
            for i, e in enumerate(entries):
                cmap, reals = _coefficient_map(e, group, n, f"system[{i}]")
                maps.append(cmap)
                rows.append(reals)
            system = SystemSpec(tuple(maps))
            if group.abelian and all(r is not None for row in rows for r in row):
                try:
                    family = NsaFamily.from_rows(rows)
                except ValueError:
                    family = None
            rows = tuple(tuple(r) for r in rows)
        operator = None
        if data.get("operator") is not None:
            op = data["operator"]
            if not isinstance(op, dict):
                raise SpecError("operator: must be a mapping")
            Q = op.get("Q", "laplacian")
            if isinstance(Q, dict):
                if set(Q) != {"form"}:
                    raise SpecError("operator.Q: expected laplacian, zero or {form: matrix}")
                try:
                    Q = ConstantForm(tuple(tuple(_rational(x, "operator.Q.form") for x in r) for r in Q["form"]))
                except ValueError as exc:
                    raise SpecError(f"operator.Q.form: {exc}") from None
            elif Q not in ("laplacian", "zero"):
                raise SpecError(f"operator.Q: unknown choice {Q!r}")
            fields_ = _terms(op.get("fields", []), group, n, "operator.fields")
            rem = _terms(op.get("remainder", []), group, n, "operator.remainder")
            operator = OperatorSpec(group, n, Q, fields_, rem)
            if system is None and fields_:
                maps = [t.a for t in fields_ if not t.a.is_zero()]
                if maps:
                    system = SystemSpec(tuple(maps))
    except ZeroMapError as exc:
        raise SpecError(f"system: {exc}") from None
    except SkewSymmetryError as exc:
        raise SpecError(f"operator: skew-symmetry invariant violated: {exc}") from None
    except SpecError:
        raise
    except (ValueError, TypeError) as exc:
        raise SpecError(str(exc)) from None
    if system is None and operator is None:
        raise SpecError("need a 'system' or an 'operator' section")
    return ProblemFile(str(data.get("name", "problem")), seed, group, n, rows, system, family, operator,
                       analysis, data)


def load_spec(path) -> ProblemFile:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SpecError(f"{path}: not valid YAML ({exc})") from None
    return parse_spec(data)
