import math
from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from ghlab.scalars import QI
from ghlab.trig import TrigPoly


def _rand_poly(seed, n=1, band=2):
    rng = np.random.default_rng(seed)
    coeffs = {}
    for k in range(-band, band + 1):
        coeffs[(k,) * n] = QI(Fraction(int(rng.integers(-4, 5)), 2), Fraction(int(rng.integers(-4, 5)), 3))
    return TrigPoly(n, coeffs)


def test_cos_sin_pointwise():
    c, s = TrigPoly.cos(1, (1,)), TrigPoly.sin(1, (1,))
    for t in (0.0, 0.3, 2.0):
        assert abs(c((t,)) - math.cos(t)) < 1e-14
        assert abs(s((t,)) - math.sin(t)) < 1e-14
    one = c * c + s * s
    assert one == TrigPoly.constant(1, 1)


@settings(max_examples=30)
@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_product_matches_pointwise(a, b):
    p, q = _rand_poly(a), _rand_poly(b)
    for t in (0.1, 1.7, 4.0):
        assert abs((p * q)((t,)) - p((t,)) * q((t,))) < 1e-9


def test_derivative_and_norm():
    p = TrigPoly.cos(1, (3,), amp=2)
    assert p.derivative(0) == TrigPoly.sin(1, (3,), amp=-6)
    # ||2 cos 3t||^2 over normalised measure = 2
    assert p.norm2() == 2
    assert p.is_real() and p.bandwidth() == 3
    assert not TrigPoly(1, {(1,): 1}).is_real()
