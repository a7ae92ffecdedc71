import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ghlab.diophantine import (
    DecimalLiteral, LiouvilleSeries, NsaFamily, PrecisionExhausted, QuadraticSurd, Rational,
    as_real, check_condition_G, check_condition_I, continued_fraction, convergent_candidates,
    liouville_witnesses, verify_equivalence,
)


def test_continued_fraction_rational_terminates():
    cf = continued_fraction(Rational(Fraction(22, 7)), 10)
    assert cf.quotients == (3, 7) and cf.terminated
    assert cf.convergents[-1] == (22, 7)


@settings(max_examples=50)
@given(st.fractions(min_value=-50, max_value=50, max_denominator=500))
def test_continued_fraction_reconstructs_rationals(x):
    cf = continued_fraction(Rational(x), 40)
    assert cf.terminated
    p, q = cf.convergents[-1]
    assert Fraction(p, q) == x


def test_golden_convergents_are_fibonacci():
    cf = continued_fraction(QuadraticSurd.golden(), 8)
    assert set(cf.quotients) == {1}
    assert [Fraction(p, q) for p, q in cf.convergents[:6]] == [1, 2, Fraction(3, 2), Fraction(5, 3),
                                                                Fraction(8, 5), Fraction(13, 8)]


def test_sqrt2_quotients():
    cf = continued_fraction(QuadraticSurd(Fraction(0), Fraction(1), 2), 6)
    assert cf.quotients == (1, 2, 2, 2, 2, 2)


def test_decimal_literal_runs_out_of_precision():
    with pytest.raises(PrecisionExhausted):
        continued_fraction(DecimalLiteral("3.14159"), 10)


def test_surd_enclosure_contains_value():
    g = QuadraticSurd.golden()
    lo, hi = g.enclosure(Fraction(1, 10 ** 30))
    assert lo <= hi and hi - lo <= Fraction(1, 10 ** 30)
    assert lo * lo - lo - 1 <= 0 <= hi * hi - hi - 1


def test_floats_are_rejected():
    with pytest.raises(TypeError):
        as_real(0.5)


@pytest.mark.parametrize("base", [10, 2])
def test_liouville_witnesses_exact(base):
    alpha = LiouvilleSeries(base, 9)
    ws = liouville_witnesses(alpha, 4)
    for w in ws:
        assert w.q == base ** math.factorial(w.k)
        # |q alpha - p| < 2 q^(1-k), rechecked here with the partial sums
        gap_lo = w.q * alpha.partial_sum(w.k + 1) - w.p
        assert 0 < gap_lo <= w.gap_hi < 2 * Fraction(w.q) ** (1 - w.k)


def test_condition_I_rational_pair_holds():
    fam = NsaFamily.from_rows([[1, Fraction(1, 2)], [Fraction(1, 3), 1]])
    res = check_condition_I(fam, 60, (Fraction(1, 4), 1))
    assert res.passed and res.n_failed == 0


def test_single_rational_field_fails_with_resonance():
    fam = NsaFamily.from_rows([[1, Fraction(2, 3)]])
    res = check_condition_G(fam, 40, (Fraction(1, 4), Fraction(1, 2)))
    assert not res.passed
    assert all(3 * xi[0] + 2 * xi[1] == 0 for xi in res.exact_zeros)


def test_verify_equivalence_agrees():
    for rows in ([[1, Fraction(1, 2)], [Fraction(1, 3), 1]], [[1, Fraction(2, 3)]],
                 [[1, QuadraticSurd.golden()]]):
        v = verify_equivalence(NsaFamily.from_rows(rows), 80)
        assert v.agree


def test_liouville_candidates_fail_both_conditions():
    fam = NsaFamily.from_rows([[1, LiouvilleSeries()]])
    cands = convergent_candidates(fam)
    v = verify_equivalence(fam, 200, candidates=cands)
    assert v.agree and not v.g_holds and not v.i_holds
