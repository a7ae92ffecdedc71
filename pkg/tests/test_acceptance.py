"""Acceptance criteria 1-9, each at its stated tolerance and runtime limit.

Every test prints one PASS/FAIL line; the lines are repeated in the pytest
terminal summary.
"""
import math
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, ROOT
from ghlab.cli import render_report, run
from ghlab.diophantine import LiouvilleSeries, NsaFamily, QuadraticSurd, liouville_witnesses, verify_equivalence
from ghlab.fields import LieElement
from ghlab.ghcheck import gh_verdict, shell_minima
from ghlab.operator import (
    TorusField, energy_identity_residual, graph_norm_bound, poincare_estimate, random_fourier, random_operator,
)
from ghlab.problem import load_spec, parse_spec
from ghlab.spectral import GroupSpec, casimir_residual, enumerate_shells, field_action, rep_block, weyl_partial_sums
from ghlab.trig import TrigPoly

pytestmark = pytest.mark.slow

PROBLEMS = ROOT / "problems"
T2, SU2 = GroupSpec.torus(2), GroupSpec.su2()
REPORTS = {}  # (command, problem) -> rendered JSON from criteria 3-6


@contextmanager
def criterion(number, title, limit):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t0
        ok = ok and dt <= limit
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({dt:.1f} s, limit {limit} s)"
        print(line)
        ACCEPTANCE_LINES.append(line)
    assert dt <= limit, f"criterion {number} exceeded {limit} s"


def _report(command, name, **kw):
    text = render_report(run(command, load_spec(PROBLEMS / f"{name}.yaml"), **kw), "json")
    REPORTS[(command, name)] = text
    return text


def _single_field_spec(row, name):
    return parse_spec({"name": name, "seed": 0, "group": {"kind": "torus", "dim": 2}, "T": {"dim": 1},
                       "system": [[str(c) for c in row]], "analysis": {"lambda_max": 10000}})


def test_criterion_1_energy_identity():
    with criterion(1, "energy identity exact = 0 and float <= 1e-10 on 100 pairs", 10):
        lams = (1, 2, 4, 5)
        for i in range(100):
            rng = np.random.default_rng([2024, i])
            P = random_operator(T2, 1, rng)
            psi = random_fourier(T2, 1, rng, lam=lams[i % 4], exact=True, tau_radius=1)
            assert energy_identity_residual(P, psi) == 0
        for i in range(100):
            rng = np.random.default_rng([2025, i])
            P = random_operator(T2, 1, rng, exact=False)
            psi = random_fourier(T2, 1, rng, lam=lams[i % 4], exact=False, tau_radius=1)
            assert abs(energy_identity_residual(P, psi)) <= 1e-10


def test_criterion_2_casimir_and_skew_symmetry():
    with criterion(2, "SU(2) j <= 20: Casimir, anti-Hermitian defect, norm bound", 30):
        shells = enumerate_shells(SU2, 420)
        assert shells[-1].two_j == 40
        for s in shells:
            assert casimir_residual(SU2, s) <= 1e-10
            for k in (1, 2, 3):
                X = LieElement.basis(SU2, k)
                A = field_action(X, s)
                assert np.abs(A + A.conj().T).max() <= 1e-12
                # ||kron(I, B)|| = ||B||
                margin = X.norm() * float(s.eigenvalue) ** 0.5 - np.linalg.norm(rep_block(X, s.two_j), 2)
                assert margin >= -1e-12


def test_criterion_3_rational_torus_pipeline():
    with criterion(3, "rational pair ConsistentGH with exact sigma bound; single fields FailZeroSymbol", 60):
        import json
        rep = json.loads(_report("check-system", "rational_pair"))
        res = rep["results"]
        assert res["gh"]["verdict"] == "ConsistentGH"
        assert res["lower_bound"]["n_violations"] == 0
        assert res["lower_bound"]["n_checked"] > 2000
        alpha, beta = Fraction(1, 2), Fraction(1, 3)
        for row in ((1, alpha), (beta, 1)):
            mins = shell_minima([LieElement(T2, row)], 10 ** 4)
            g = gh_verdict(mins)
            assert g.verdict == "FailZeroSymbol"
            zero = [m for m in mins if m.lam > 0 and m.sigma_sq == 0]
            xi = zero[0].mode
            assert row[0] * xi[0] + row[1] * xi[1] == 0


def test_criterion_4_diophantine_triptych():
    import json
    with criterion(4, "golden rho in [0.4, 0.6]; Liouville FailSuperpolynomial; equivalence at R = 500", 300):
        golden = json.loads(_report("check-system", "golden"))["results"]
        assert golden["gh"]["verdict"] == "ConsistentGH"
        assert 0.4 <= golden["gh"]["fit"]["rho"] <= 0.6
        liou = json.loads(_report("check-system", "liouville"))["results"]
        assert liou["gh"]["verdict"] == "FailSuperpolynomial"
        assert liou["gh"]["n_witnesses"] >= 3
        alpha = LiouvilleSeries(10, 10)
        ws = liouville_witnesses(alpha, 7)
        qs = {w.q for w in ws}
        for xi in liou["gh"]["witnesses"]:
            p, q = -int(xi[0]), int(xi[1])
            assert q in qs
            # |q alpha - p| bracketed by big-integer partial sums
            k = next(w.k for w in ws if w.q == q)
            gap_lo = q * alpha.partial_sum(k + 1) - p
            gap_hi = gap_lo + q * alpha.tail_bound(k + 1)
            assert 0 < gap_lo < gap_hi < Fraction(1, (1 + q * q + p * p)) ** 2
        families = [
            NsaFamily.from_rows([[1, Fraction(1, 2)], [Fraction(1, 3), 1]]),
            NsaFamily.from_rows([[1, QuadraticSurd.golden()]]),
            NsaFamily.from_rows([[1, alpha]]),
        ]
        from ghlab.diophantine import convergent_candidates
        for fam in families:
            cands = None if fam.rational else convergent_candidates(fam, 10, 6)
            v = verify_equivalence(fam, 500, candidates=cands)
            assert v.agree


def test_criterion_5_counterexample_closure():
    import json
    with criterion(5, "singular solutions not smooth, images smooth (K = 20)", 30):
        for name in ("single_field", "liouville"):
            res = json.loads(_report("counterexample", name))["results"]
            assert res["status"] == "counterexample"
            assert res["solution"]["verdict"] != "ConsistentSmooth"
            assert all(r["verdict"] == "ConsistentSmooth" for r in res["images"])
            assert res["closure"]
        assert json.loads(REPORTS[("counterexample", "single_field")])["results"]["n_modes"] == 20
        # the second single field of criterion 3, through the same pipeline
        pf = _single_field_spec((Fraction(1, 3), 1), "beta-field")
        res = run("counterexample", pf)["results"]
        assert res["n_modes"] == 20 and res["closure"]


def test_criterion_6_su2_sufficiency():
    import json
    with criterion(6, "SU(2) operator: full hull, line ranges, ConsistentGH, positive probe", 120):
        rep = json.loads(_report("analyze-operator", "su2_operator"))
        res = rep["results"]
        assert res["hull"]["kind"] == "HormanderHullFull"
        assert res["commutativity"] == [True, True]
        assert res["gh"]["verdict"] == "ConsistentGH"
        # j <= 20 counts half-integer spins: 2j = 1..40
        rows = rep["shells"]
        assert len(rows) == 40 and all(r["sigma_min"] > 0 for r in rows)
        probe = res["probe"]
        assert probe["all_positive"] and len(probe["lams"]) == 20
        assert Fraction(probe["lams"][-1]) == 110
        assert min(probe["worst_ratios"]) > 0


def test_criterion_7_obstruction():
    import json
    with criterion(7, "{X3} on SU(2): commutative hull obstruction, not ConsistentGH", 60):
        res = json.loads(_report("check-system", "su2_x3"))["results"]
        assert res["hull"]["kind"] == "CommutativeHullObstruction"
        assert res["gh"]["verdict"] != "ConsistentGH"


def test_criterion_8_auxiliary_inequalities():
    with criterion(8, "Poincare C(1/2) >= 2 and stable; graph norm of cos(t) d/dt <= 1; Weyl sums", 60):
        a = poincare_estimate(0.5, seed=0)
        b = poincare_estimate(0.5, seed=1)
        assert a.C >= 2 and b.C >= 2
        assert abs(a.C - b.C) <= 0.2 * min(a.C, b.C)
        g = graph_norm_bound(TorusField((TrigPoly.cos(1, (1,)),)))
        assert g.max_ratio <= 1 + 1e-10
        for G in (T2, SU2):
            lams, sums = weyl_partial_sums(G, 10 ** 4)
            assert np.all(np.diff(sums) >= 0)
            # bounded: the last decade adds less than 0.1% of the total
            assert sums[-1] - sums[np.searchsorted(lams, 10 ** 3, side="right") - 1] <= 1e-3 * sums[-1]


def test_criterion_9_determinism(monkeypatch):
    keys = [("check-system", "rational_pair"), ("check-system", "golden"), ("check-system", "liouville"),
            ("counterexample", "single_field"), ("counterexample", "liouville"),
            ("analyze-operator", "su2_operator")]
    with criterion(9, "reports of criteria 3-6 byte-identical across runs and GHLAB_THREADS 1 / 8", 600):
        for key in keys:
            texts = [REPORTS[key]] if key in REPORTS else []
            for threads in ("1", "8"):
                monkeypatch.setenv("GHLAB_THREADS", threads)
                texts.append(render_report(run(key[0], load_spec(PROBLEMS / f"{key[1]}.yaml")), "json"))
            assert all(t == texts[0] for t in texts), key
