from fractions import Fraction

import pytest

from ghlab.fields import (
    CoefficientMap, LieElement, SystemSpec, ZeroMapError, bracket, check_structure_constants,
    commutativity_check, estimate_alpha_delta, lie_hull, range_basis,
)
from ghlab.spectral import GroupSpec
from ghlab.trig import TrigPoly

SU2 = GroupSpec.su2()
T2 = GroupSpec.torus(2)
X1, X2, X3 = (LieElement.basis(SU2, k) for k in (1, 2, 3))


def test_brackets_and_structure_constants():
    assert bracket(X1, X2) == X3 and bracket(X2, X3) == X1 and bracket(X3, X1) == X2
    check_structure_constants(SU2)
    check_structure_constants(T2)


def test_lie_hull_dimensions():
    assert len(lie_hull([X1, X2])) == 3
    assert len(lie_hull([X3])) == 1
    assert len(lie_hull([X1 + X2, (X1 + X2) * 2])) == 1
    assert len(lie_hull([LieElement.basis(T2, 1)])) == 1


def test_range_basis_line_map():
    a = CoefficientMap.line(TrigPoly.cos(1, (1,)) + TrigPoly.constant(1, 2), X1 + X2 * Fraction(1, 2))
    rb = range_basis(a)
    assert rb.rank == 1 and rb.pivots == (0,) and rb.others == (1, 2)
    assert rb.basis[0].coords == (1, Fraction(1, 2), 0)
    assert commutativity_check(a)


def test_range_basis_two_independent_components():
    a = CoefficientMap(SU2, (TrigPoly.cos(1, (1,)), TrigPoly.sin(1, (1,)), TrigPoly.constant(1, 0)))
    rb = range_basis(a)
    assert rb.rank == 2
    assert not commutativity_check(a)


def test_zero_map_rejected():
    z = CoefficientMap.constant(T2, 1, (0, 0))
    with pytest.raises(ZeroMapError):
        SystemSpec((z,))
    with pytest.raises(ZeroMapError):
        range_basis(z)


def test_non_real_component_rejected():
    with pytest.raises(ValueError):
        CoefficientMap(T2, (TrigPoly(1, {(1,): 1}), TrigPoly.constant(1, 1)))


def test_alpha_delta_constant_map():
    a = CoefficientMap.constant(T2, 1, (1, 0))
    ad = estimate_alpha_delta(a, seed=3)
    assert ad.delta == 1.0 and ad.alpha > 0
    # cos^2 t exceeds 1/2 on half the circle
    b = CoefficientMap(T2, (TrigPoly.cos(1, (1,)), TrigPoly.constant(1, 0)))
    ad = estimate_alpha_delta(b, alpha=0.5, t_grid=4096)
    assert abs(ad.delta - 0.5) < 1e-3
