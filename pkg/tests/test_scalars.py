import math
from fractions import Fraction

from hypothesis import given, strategies as st

from ghlab.scalars import QI, abs2, conj, log_fraction

fr = st.fractions(max_denominator=50).filter(lambda x: abs(x) < 100)


@given(fr, fr, fr, fr)
def test_qi_field_ops_match_complex(a, b, c, d):
    x, y = QI(a, b), QI(c, d)
    zx, zy = complex(float(a), float(b)), complex(float(c), float(d))
    assert abs(complex(x * y) - zx * zy) < 1e-9 * (1 + abs(zx * zy))
    assert complex(x + y) == complex(float(a + c), float(b + d))
    if y:
        assert x / y * y == x


@given(fr, fr)
def test_abs2_and_conj(a, b):
    x = QI(a, b)
    assert abs2(x) == a * a + b * b
    assert x * conj(x) == QI(abs2(x), 0)


def test_log_fraction_handles_huge_values():
    q = Fraction(10 ** 5000, 3)
    assert math.isclose(log_fraction(q), 5000 * math.log(10) - math.log(3), rel_tol=1e-12)
    assert math.isclose(log_fraction(1 / q), -(5000 * math.log(10) - math.log(3)), rel_tol=1e-12)
