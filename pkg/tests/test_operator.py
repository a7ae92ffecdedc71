import math
from fractions import Fraction

import numpy as np
import pytest

from ghlab.fields import CoefficientMap, LieElement
from ghlab.fourier import FourierData
from ghlab.operator import (
    ConstantForm, FieldTerm, OperatorSpec, SkewSymmetryError, TorusField, apply_operator,
    classify_smoothness, cone_split_check, energy_identity_residual, final_inequality_probe,
    graph_norm_bound, partial_projection_G, poincare_estimate, poincare_ratio, product_check,
    random_fourier, random_operator, tildeP_ellipticity,
)
from ghlab.scalars import QI
from ghlab.spectral import GroupSpec
from ghlab.trig import TrigPoly

T1, T2, SU2 = GroupSpec.torus(1), GroupSpec.torus(2), GroupSpec.su2()


def test_skew_symmetry_enforced():
    a = CoefficientMap.constant(T2, 1, (1, 0))
    W = TorusField((TrigPoly.cos(1, (1,)),))
    with pytest.raises(SkewSymmetryError, match="skew-symmetry"):
        OperatorSpec(T2, 1, "laplacian", (FieldTerm(a, W),))


def test_operator_on_single_mode():
    a = CoefficientMap.constant(T2, 1, (1, 0))
    P = OperatorSpec(T2, 1, "laplacian", (FieldTerm(a, TorusField.constant((Fraction(1, 2),))),))
    f = FourierData.single(T2, 1, (2,), (1, 0))
    # Delta_T gives 4, -(i*1 + i*2/2)^2 gives 4
    assert apply_operator(P, f) == f.scale(8)


def test_energy_identity_exact_and_float():
    for i in range(10):
        rng = np.random.default_rng([1, i])
        P = random_operator(T2, 1, rng)
        psi = random_fourier(T2, 1, rng, lam=2, exact=True, tau_radius=1)
        assert energy_identity_residual(P, psi) == 0
        form = apply_operator(P, psi).inner(psi)
        assert form.im == 0 and form.re >= 0


def test_linear_and_commutes_with_projection():
    rng = np.random.default_rng([2, 0])
    P = random_operator(T2, 1, rng)
    f = random_fourier(T2, 1, rng, modes=[(1, 0), (1, 1)], exact=True, tau_radius=1)
    g = random_fourier(T2, 1, rng, modes=[(1, 0), (0, 2)], exact=True, tau_radius=1)
    assert apply_operator(P, f + g.scale(QI(2, 1))) == apply_operator(P, f) + apply_operator(P, g).scale(QI(2, 1))
    for lam in (1, 2, 4):
        assert partial_projection_G(apply_operator(P, f + g), lam) == apply_operator(P, partial_projection_G(f + g, lam))


def test_remainder_never_decreases_form():
    rng = np.random.default_rng([3, 0])
    P = random_operator(T2, 1, rng)
    R = random_operator(T2, 1, rng, n_fields=1)
    P0 = OperatorSpec(T2, 1, P.Q, P.fields, R.fields)
    psi = random_fourier(T2, 1, rng, lam=1, exact=True, tau_radius=1)
    assert apply_operator(P0, psi).inner(psi).re >= apply_operator(P, psi).inner(psi).re


def test_ellipticity():
    a = CoefficientMap.constant(T1, 1, (1,))
    P = OperatorSpec(T1, 1, "zero", (FieldTerm(a, TorusField.constant((1,))),))
    assert tildeP_ellipticity(P).elliptic
    assert not tildeP_ellipticity(OperatorSpec(T1, 1, "zero")).elliptic
    assert tildeP_ellipticity(OperatorSpec(T1, 1, "zero")).witness_tau == (1,)
    with pytest.raises(ValueError):
        ConstantForm(((1, 2), (2, 1)))


def test_probe_exact_path_golden_like():
    # constant rational operator: direct per-mode minimum
    a = CoefficientMap.constant(T2, 1, (1, Fraction(1, 2)))
    b = CoefficientMap.constant(T2, 1, (Fraction(1, 3), 1))
    P = OperatorSpec(T2, 1, "laplacian", (FieldTerm(a, TorusField.zero(1)), FieldTerm(b, TorusField.zero(1))))
    rep = final_inequality_probe(P, 200)
    assert rep.exact_path and rep.all_positive


def test_probe_su2_positive_and_seeded():
    a1 = CoefficientMap.line(TrigPoly.constant(1, Fraction(3, 2)) + TrigPoly.cos(1, (1,)), LieElement.basis(SU2, 1))
    a2 = CoefficientMap.line(TrigPoly.constant(1, 2) + TrigPoly.sin(1, (1,)), LieElement.basis(SU2, 2))
    P = OperatorSpec(SU2, 1, "laplacian", (FieldTerm(a1.to_float(), TorusField.constant((0.5,), False)),
                                           FieldTerm(a2.to_float(), TorusField.constant((1.0,), False))))
    r1 = final_inequality_probe(P, 2, trials=2, seed=4)
    r2 = final_inequality_probe(P, 2, trials=2, seed=4)
    assert r1.worst_ratios == r2.worst_ratios and r1.all_positive


def test_classify_smoothness():
    smooth = [(L, -L * math.log(2)) for L in range(1, 40)]
    assert classify_smoothness(smooth).verdict == "ConsistentSmooth"
    rough = [(L, 2 * math.log1p(L)) for L in range(1, 40)]
    rep = classify_smoothness(rough)
    assert rep.verdict == "DistributionOrder" and abs(rep.exponent - 2) < 1e-9


def test_cone_split():
    # blocks decaying like (1 + mu + lambda)^(-10): both hypotheses hold
    coeffs = {}
    for k in range(0, 12):
        for xi in ((k, 0), (0, k)):
            coeffs[((k,), xi)] = (1 + 2 * k * k) ** -10.0
    f = FourierData(T2, 1, coeffs, exact=False)
    assert cone_split_check(f, 0.5, 2).verdict == "SmoothConsistent"
    with pytest.raises(ValueError):
        cone_split_check(f, 1.0, 2)


def test_poincare_constants():
    est = poincare_estimate(0.5, trials=100, seed=0)
    assert est.C >= 2 and est.stable
    assert poincare_ratio(TrigPoly.constant(1, 1.0, False), [(0.0, math.pi)]) == pytest.approx(2.0)
    high = TrigPoly(1, {(20,): 1.0}, False)
    assert poincare_ratio(high, [(0.0, math.pi)]) < 0.01


def test_graph_norm():
    r = graph_norm_bound(TorusField.constant((Fraction(3, 2),)), trials=50)
    assert r.max_ratio == pytest.approx(1.5, abs=1e-12) and r.skipped == 1
    r = graph_norm_bound(TorusField((TrigPoly.cos(1, (1,)),)), trials=200)
    assert r.max_ratio <= 1 + 1e-10


def test_product_check_modes():
    a = CoefficientMap.constant(T2, 1, (1, Fraction(1, 2)))
    b = CoefficientMap.constant(T2, 1, (Fraction(1, 3), 1))
    P = OperatorSpec(T2, 1, "laplacian", (FieldTerm(a, TorusField.constant((1,))),
                                          FieldTerm(b, TorusField.zero(1))))
    rep = product_check(P, "commuting-w", mu_max=9, lam_max=25)
    assert all(ok for _, ok in rep.hypotheses)
    with pytest.raises(ValueError):
        product_check(P, "other")
