"""Batch front end: ``ghlab <command> --spec <file> [--out FILE] [--format csv|json]``.

Commands:
  check-system      shell minima, gh verdict and hull checks for a system
  analyze-operator  ellipticity, commutativity, gh verdict, probe, product checks
  diophantine       both non-simultaneous approximability conditions
  counterexample    singular solution for a failing system and its smoothness
  inequalities      energy, Casimir, Weyl, Poincare and graph-norm sweeps

Exit codes: 0 analysis complete (any verdict), 2 spec error, 3 numeric failure.
Reports carry no wall-clock data so reruns are byte-identical.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from ._parallel import worker_count
from .diophantine import (
    LiouvilleSeries,
    PrecisionExhausted,
    Rational,
    RealSpec,
    continued_fraction,
    convergent_candidates,
    liouville_witnesses,
    verify_equivalence,
)
from .fields import LieElement, commutativity_check, estimate_alpha_delta
from .ghcheck import (
    FAIL_SUPER,
    FAIL_ZERO,
    build_singular_solution,
    convergent_witnesses,
    gh_verdict,
    hull_checks,
    lower_bound_check,
    shell_minima,
)
from .operator import (
    OperatorSpec,
    classify_smoothness,
    energy_identity_residual,
    final_inequality_probe,
    graph_norm_bound,
    poincare_estimate,
    product_check,
    random_fourier,
    tildeP_ellipticity,
    apply_operator,
)
from .problem import ProblemFile, SpecError, load_spec
from .spectral import casimir_residual, enumerate_shells, weyl_partial_sums

__all__ = ["COMMANDS", "run", "emit_report", "render_report", "main"]

COMMANDS = ("check-system", "analyze-operator", "diophantine", "counterexample", "inequalities")
CSV_COLUMNS = ("lambda", "sigma_min", "witness", "ratio")
_BIG = 2 ** 63


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------

def _plain(x):
    """JSON-ready copy: Fractions and non-finite floats become strings."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        x = int(x)
        return x if abs(x) < _BIG else str(x)  # huge witnesses stay parseable
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, RealSpec):
        return repr(x)
    if isinstance(x, LieElement):
        return [_plain(c) for c in x.coords]
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: _plain(getattr(x, f.name)) for f in dataclasses.fields(x) if f.repr}
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    return str(x)


def _lift_int_limit():
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)  # Liouville witnesses have thousands of digits


def _mode_str(mode) -> str:
    return " ".join(str(int(v)) for v in mode)


def render_report(report: dict, fmt: str = "json") -> str:
    _lift_int_limit()
    if fmt == "json":
        return json.dumps(_plain(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in report.get("shells", []):
            w.writerow([_plain(row.get(c, "")) if row.get(c) is not None else "" for c in CSV_COLUMNS])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(report: dict, fmt: str, path=None) -> str:
    """Write the rendered report to ``path`` (stdout when None) in UTF-8."""
    text = render_report(report, fmt)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_bytes(text.encode("utf-8"))
    return text


# ---------------------------------------------------------------------------
# pipelines
# ---------------------------------------------------------------------------

def _shell_rows(minima, ratios=None):
    rows = []
    for i, m in enumerate(minima):
        if m.lam == 0:
            continue
        r = ratios.get(m.lam) if ratios is not None else m.sigma / math.sqrt(float(m.lam))
        rows.append({"lambda": m.lam, "sigma_min": m.sigma, "witness": _mode_str(m.mode), "ratio": r})
    return rows


def _gh_summary(rep):
    return {
        "verdict": rep.verdict,
        "fit": rep.fit,
        "witnesses": [list(w) for w in rep.witnesses[:50]],
        "n_witnesses": len(rep.witnesses),
        "lambda_0": rep.lambda_0,
        "s": rep.s,
        "zero_shells": list(rep.zero_shells[:50]),
        "n_zero_shells": len(rep.zero_shells),
        "note": rep.note,
    }


def _need_system(pf: ProblemFile):
    if pf.system is None:
        raise SpecError("this command needs a 'system' section or operator fields")
    return pf.system


def _need_seed(pf: ProblemFile):
    if pf.seed is None:
        raise SpecError("seed: randomized probes need an explicit seed")
    return pf.seed


def _system_analysis(pf: ProblemFile, lam_max):
    a = pf.analysis
    system = _need_system(pf)
    rows = _rational_rows(pf)
    if rows is not None:
        # raw constant rows: the symbol of the fields as written, not their pivot-normalised range basis
        system = [LieElement(pf.group, tuple(r)) for r in rows]
    minima = shell_minima(system, lam_max)
    extra = ()
    if pf.family is not None and not pf.family.rational:
        extra = convergent_witnesses(pf.family, a["cf_depth"], a["liouville_order"])
    rep = gh_verdict(minima, extra, s=a["s"], min_witnesses=a["min_witnesses"],
                     lambda_0=a["lambda_0"], min_quality=a["min_quality"])
    return minima, extra, rep


def _rational_rows(pf: ProblemFile):
    if pf.system_rows is None or not pf.group.abelian:
        return None
    out = []
    for row in pf.system_rows:
        if row is None or not all(isinstance(c, Rational) for c in row):
            return None
        out.append([c.value for c in row])
    return out


def _check_system(pf, lam_max, radius):
    minima, extra, rep = _system_analysis(pf, lam_max)
    out = {"gh": _gh_summary(rep), "hull": hull_checks(pf.system), "n_shells": len(minima)}
    rows = _rational_rows(pf)
    if rows is not None and rep.verdict not in (FAIL_ZERO,):
        out["lower_bound"] = lower_bound_check(minima, rows)
    if extra:
        out["convergent_witnesses"] = [
            {"xi": w.xi, "lambda": w.lam, "log_sigma": w.log_sigma} for w in extra]
    return out, _shell_rows(minima)


def _analyze_operator(pf, lam_max, radius):
    P = pf.operator
    if P is None:
        raise SpecError("analyze-operator needs an 'operator' section")
    seed = _need_seed(pf)
    a = pf.analysis
    out = {"ellipticity": tildeP_ellipticity(P)}
    out["commutativity"] = [commutativity_check(t.a) for t in P.fields]
    out["alpha_delta"] = [estimate_alpha_delta(t.a, seed=seed) for t in P.fields if not t.a.is_zero()]
    rows = []
    if pf.system is not None:
        minima = shell_minima(pf.system, lam_max)
        rep = gh_verdict(minima, s=a["s"], min_witnesses=a["min_witnesses"],
                         lambda_0=a["lambda_0"], min_quality=a["min_quality"])
        out["gh"] = _gh_summary(rep)
        out["hull"] = hull_checks(pf.system)
        rows = _shell_rows(minima)
    probe_max = a["probe_lambda_max"] if a["probe_lambda_max"] is not None else lam_max
    probe = final_inequality_probe(P, probe_max, trials=a["trials"], seed=seed, tau_radius=a["tau_radius"])
    out["probe"] = probe
    ratios = dict(zip(probe.lams, probe.worst_ratios))
    for r in rows:
        r["ratio"] = ratios.get(r["lambda"])
    if a["product_mode"] is not None:
        out["product"] = product_check(P, a["product_mode"], mu_max=a["mu_max"], lam_max=min(Fraction(lam_max), 64))
    return out, rows


def _diophantine(pf, lam_max, radius):
    fam = pf.family
    if fam is None:
        raise SpecError("diophantine needs a torus system of constant fields with rational pivots")
    a = pf.analysis
    cands = convergent_candidates(fam, a["cf_depth"], a["liouville_order"]) if not fam.rational else None
    verdict = verify_equivalence(fam, radius, (Fraction(str(a["B"])), Fraction(str(a["M"]))), cands)
    out = {"equivalence": verdict, "continued_fractions": [], "liouville_witnesses": []}
    for li, b in enumerate(fam.blocks):
        for vec in b.vectors:
            for c in vec:
                try:
                    cf = continued_fraction(c, a["cf_depth"])
                except PrecisionExhausted:
                    cf = None
                out["continued_fractions"].append({"block": li, "value": c, "cf": cf})
                if isinstance(c, LiouvilleSeries):
                    out["liouville_witnesses"].extend(liouville_witnesses(c, a["liouville_order"]))
    rows = [{"lambda": sum(x * x for x in xi), "sigma_min": None, "witness": _mode_str(xi), "ratio": None}
            for xi in verdict.condition_I.failures]
    return out, rows


def _counterexample(pf, lam_max, radius):
    a = pf.analysis
    K = int(a["K"])
    minima, extra, rep = _system_analysis(pf, lam_max)
    out = {"gh": _gh_summary(rep), "K": K}
    if rep.verdict not in (FAIL_ZERO, FAIL_SUPER):
        out["status"] = "no counterexample: system not failing on tested data"
        return out, _shell_rows(minima)
    from .spectral import eigenvalue, SU2Mode

    group = pf.group
    modes, lams = [], []
    source = rep.witnesses
    if rep.verdict == FAIL_SUPER and extra:
        # the whole convergent sequence, not only the points past the (1 + lambda)^(-s) cut
        source = [w.xi for w in sorted(extra, key=lambda w: w.lam) if w.lam >= rep.lambda_0]
    for w in source:
        m = SU2Mode(*w) if group.kind == "su2" else tuple(int(v) for v in w)
        lam = eigenvalue(group, m)
        if lam > 0 and (not lams or lam > lams[-1]):
            modes.append(m)
            lams.append(lam)
        if len(modes) == K:
            break
    sol = build_singular_solution(group, modes, pf.n)
    norms = sol.shell_norms()
    u_class = classify_smoothness([(lam, math.log(v)) for lam, v in norms])
    rows_g = _rational_rows(pf)
    if group.abelian and pf.system_rows is not None:
        gens = rows_g if rows_g is not None else [list(r) for r in pf.system_rows]
    else:
        gens = pf.system.generators()
    logs = sol.image_log_norms(gens)
    images = []
    for gi in range(len(gens)):
        pairs = [(lam, row[gi]) for lam, row in logs]
        images.append(classify_smoothness(pairs))
    out.update({
        "status": "counterexample",
        "modes": [list(m) for m in modes],
        "n_modes": len(modes),
        "solution": u_class,
        "images": images,
        "closure": (not u_class.smooth) and all(r.smooth for r in images),
    })
    rows = []
    for (lam, row), m in zip(logs, modes):
        worst = max(row)
        rows.append({"lambda": lam, "sigma_min": math.exp(worst) if worst > -700 else 0.0,
                     "witness": _mode_str(m), "ratio": worst})
    return out, rows


def _inequalities(pf, lam_max, radius):
    seed = _need_seed(pf)
    a = pf.analysis
    group, n = pf.group, pf.n
    out = {}
    P = pf.operator
    if P is not None:
        P0 = OperatorSpec(P.group, P.n, P.Q, P.fields)
        rng = np.random.default_rng([seed, 0])
        shells = [s for s in enumerate_shells(group, min(Fraction(lam_max), 30)) if s.eigenvalue > 0]
        worst_exact, worst_float, min_form, max_imag = Fraction(0), 0.0, math.inf, 0.0
        exact = P0.exact and group.abelian
        for i in range(int(a["energy_trials"])):
            sh = shells[i % len(shells)]
            psi = random_fourier(group, n, rng, tau_radius=a["tau_radius"], modes=sh.modes, exact=exact)
            r = energy_identity_residual(P0, psi)
            if exact:
                worst_exact = max(worst_exact, abs(r.re), abs(r.im))
            form = complex(apply_operator(P0, psi.to_float()).inner(psi.to_float()))
            rf = complex(energy_identity_residual(P0, psi.to_float()))
            worst_float = max(worst_float, abs(rf))
            min_form = min(min_form, form.real)
            max_imag = max(max_imag, abs(form.imag))
        out["energy"] = {"trials": int(a["energy_trials"]), "exact": exact,
                         "max_exact_residual": worst_exact if exact else None,
                         "max_float_residual": worst_float, "min_form": min_form,
                         "max_form_imag": max_imag}
        gn = []
        for t in P.fields:
            if not t.W.is_zero():
                gn.append(graph_norm_bound(t.W, trials=int(a["graph_trials"]), seed=seed))
        out["graph_norm"] = gn
    shells = enumerate_shells(group, min(Fraction(lam_max), 420) if group.kind == "su2" else lam_max)
    cas = [casimir_residual(group, s) for s in shells]
    out["casimir"] = {"n_shells": len(shells), "max_residual": max(cas, default=0.0)}
    lams, sums = weyl_partial_sums(group, lam_max)
    out["weyl"] = {"n_eigenvalues": len(lams), "monotone": bool(np.all(np.diff(sums) >= 0)),
                   "final_sum": float(sums[-1]) if len(sums) else 0.0}
    out["poincare"] = poincare_estimate(float(Fraction(str(a["delta"]))), trials=int(a["poincare_trials"]), seed=seed)
    rows = [{"lambda": s.eigenvalue, "sigma_min": None, "witness": "", "ratio": c} for s, c in zip(shells, cas)]
    return out, rows


_PIPELINES = {
    "check-system": _check_system,
    "analyze-operator": _analyze_operator,
    "diophantine": _diophantine,
    "counterexample": _counterexample,
    "inequalities": _inequalities,
}


def run(command: str, pf: ProblemFile, lambda_max=None, radius=None) -> dict:
    """Run one pipeline and return the full report."""
    _lift_int_limit()
    if command not in _PIPELINES:
        raise SpecError(f"unknown command {command!r}")
    lam_max = Fraction(str(lambda_max if lambda_max is not None else pf.analysis["lambda_max"]))
    radius = int(radius if radius is not None else pf.analysis["radius"])
    if lam_max <= 0 or radius <= 0:
        raise SpecError("lambda_max and radius must be positive")
    results, rows = _PIPELINES[command](pf, lam_max, radius)
    params = dict(pf.analysis)
    params.update({"lambda_max": lam_max, "radius": radius})
    return {
        "tool": "ghlab",
        "version": __version__,
        "command": command,
        "problem": pf.name,
        "seed": pf.seed,
        "group": str(pf.group),
        "n": pf.n,
        "parameters": params,
        "results": results,
        "shells": rows,
    }


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ghlab", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--spec", required=True, help="YAML problem file")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--lambda-max", dest="lambda_max", default=None, help="override analysis.lambda_max")
    p.add_argument("--radius", type=int, default=None, help="override analysis.radius")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        worker_count()
        pf = load_spec(args.spec)
        report = run(args.command, pf, args.lambda_max, args.radius)
        text = render_report(report, args.format)
    except (SpecError, OSError) as exc:
        print(f"ghlab: spec error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # bad GHLAB_THREADS or invalid parameters reached a module
        print(f"ghlab: spec error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"ghlab: numeric failure: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # no partial report on any module failure
        print(f"ghlab: internal failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_bytes(text.encode("utf-8"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
