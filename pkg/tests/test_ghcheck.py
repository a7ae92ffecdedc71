import math
from fractions import Fraction

import numpy as np
import pytest

from ghlab.diophantine import LiouvilleSeries, NsaFamily, QuadraticSurd
from ghlab.fields import LieElement, SystemSpec
from ghlab.ghcheck import (
    InsufficientData, build_singular_solution, convergent_witnesses, fit_exponent, fit_log_power,
    gh_verdict, hull_checks, lower_bound_check, shell_minima, symbol_witness,
)
from ghlab.operator import classify_smoothness
from ghlab.spectral import GroupSpec, enumerate_shells, field_action

T2 = GroupSpec.torus(2)
SU2 = GroupSpec.su2()
X1, X2, X3 = (LieElement.basis(SU2, k) for k in (1, 2, 3))


def test_torus_minima_exact_against_brute_force():
    rows = [(1, Fraction(1, 2)), (Fraction(1, 3), 1)]
    mins = shell_minima([LieElement(T2, r) for r in rows], 50)
    for m, s in zip(mins, enumerate_shells(T2, 50)):
        brute = min(sum((r[0] * x + r[1] * y) ** 2 for r in rows) for x, y in s.modes)
        assert m.lam == s.eigenvalue and m.sigma_sq == brute


def test_su2_minima_against_dense_svd():
    mins = shell_minima([X1, X2], 6)
    for m, s in zip(mins, enumerate_shells(SU2, 6)):
        A = np.vstack([field_action(X, s) for X in (X1, X2)])
        assert abs(m.sigma - np.linalg.svd(A, compute_uv=False).min()) < 1e-10


def test_fit_recovers_power_law():
    lams = np.arange(10, 2000, 7)
    fit = fit_log_power(lams, np.log(3.0) - 0.75 * np.log1p(lams))
    assert abs(fit[1] - 0.75) < 1e-9 and abs(fit[0] - 3.0) < 1e-6


def test_fit_needs_points():
    mins = shell_minima([X1, X2], 1)
    with pytest.raises(InsufficientData):
        fit_exponent(mins[1:2])


def test_verdicts_on_torus():
    good = gh_verdict(shell_minima(SystemSpec.constant(T2, [(1, Fraction(1, 2)), (Fraction(1, 3), 1)]), 2000))
    assert good.verdict == "ConsistentGH"
    bad = gh_verdict(shell_minima(SystemSpec.constant(T2, [(1, Fraction(2, 3))]), 2000))
    assert bad.verdict == "FailZeroSymbol"
    assert bad.witnesses[0] == (-2, 3)
    assert all(3 * x + 2 * y == 0 for x, y in bad.witnesses)


def test_lower_bound_check():
    rows = [(1, Fraction(1, 2)), (Fraction(1, 3), 1)]
    chk = lower_bound_check(shell_minima([LieElement(T2, r) for r in rows], 500), rows)
    assert chk.n_violations == 0 and chk.n_checked > 100
    s2 = np.linalg.eigvalsh(np.array([[1, 0.5], [1 / 3, 1]]).T @ np.array([[1, 0.5], [1 / 3, 1]])).min()
    assert abs(chk.s_min_sq - s2) < 1e-12


def test_symbol_witness_golden_brackets_value():
    fam = NsaFamily.from_rows([[1, QuadraticSurd.golden()]])
    w = symbol_witness(fam, (-13, 8))
    val = (-13 + 8 * (1 + 5 ** 0.5) / 2) ** 2
    assert float(w.sigma_sq_lo) <= val * (1 + 1e-12) and val <= float(w.sigma_sq_hi) * (1 + 1e-12)


def test_liouville_witnesses_decay():
    fam = NsaFamily.from_rows([[1, LiouvilleSeries(10, 9)]])
    ws = convergent_witnesses(fam, liouville_order=6)
    assert sum(w.decays_faster_than(2) for w in ws) >= 2
    assert all(b.lam > a.lam for a, b in zip(ws, ws[1:]))


def test_hull_checks():
    assert hull_checks([X1, X2]).kind == "HormanderHullFull"
    assert hull_checks([X3]).kind == "CommutativeHullObstruction"
    assert hull_checks([LieElement.basis(T2, 1)]).kind == "Neither"


def test_singular_solution_for_resonant_field():
    modes = [(-2 * k, 3 * k) for k in range(1, 21)]
    sol = build_singular_solution(T2, modes)
    assert [n for _, n in sol.shell_norms()] == [1.0] * 20
    assert classify_smoothness([(l, math.log(n)) for l, n in sol.shell_norms()]).verdict == "DistributionOrder"
    logs = sol.image_log_norms([(1, Fraction(2, 3))])
    assert all(row[0] == -math.inf for _, row in logs)
    assert sol.image(LieElement(T2, (1, Fraction(2, 3)))).is_zero()


def test_singular_solution_needs_increasing_shells():
    with pytest.raises(ValueError):
        build_singular_solution(T2, [(0, 2), (2, 0)])
