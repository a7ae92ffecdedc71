from fractions import Fraction

import numpy as np

from ghlab.fourier import FourierData
from ghlab.operator import random_fourier
from ghlab.scalars import QI
from ghlab.spectral import GroupSpec, SU2Mode
from ghlab.trig import TrigPoly

T2 = GroupSpec.torus(2)
SU2 = GroupSpec.su2()


def test_laplacian_on_single_mode():
    f = FourierData.single(T2, 1, (2,), (1, 0))
    assert f.laplacian() == f.scale(5)
    assert f.laplacian_T() == f.scale(4)


def test_cos_squared_convolution():
    f = FourierData.single(T2, 1, (0,), (1, 0))
    c = TrigPoly.cos(1, (1,))
    g = f.multiply(c * c)
    assert g.coeffs == {((0,), (1, 0)): QI(Fraction(1, 2)), ((2,), (1, 0)): QI(Fraction(1, 4)),
                        ((-2,), (1, 0)): QI(Fraction(1, 4))}


def test_blockwise_laplacian_pairing():
    rng = np.random.default_rng([5, 0])
    for i in range(5):
        f = random_fourier(T2, 1, rng, lam=5, exact=True)
        g = random_fourier(T2, 1, rng, lam=5, exact=True)
        lhs = f.laplacian().inner(g)
        rhs = QI(0)
        for (tau, mode), v in f.coeffs.items():
            w = g.coeffs.get((tau, mode))
            if w is not None:
                rhs = rhs + v * w.conjugate() * (sum(t * t for t in tau) + 5)
        assert lhs == rhs


def test_projections_partition():
    rng = np.random.default_rng([6, 0])
    f = random_fourier(T2, 1, rng, modes=[(1, 0), (1, 1), (2, 0)], exact=True)
    total = FourierData(T2, 1, {}, True)
    for lam in f.g_eigenvalues():
        total = total + f.projection_G(lam)
    assert total == f
    assert sum((n2 for _, n2 in f.blocks()), Fraction(0)) == f.norm2()


def test_su2_lie_action_matches_bracket():
    f = FourierData(SU2, 1, {((0,), SU2Mode(2, 1, c)): complex(c, -c) for c in (1, 2, 3)}, exact=False)
    X1, X2, X3 = (1, 0, 0), (0, 1, 0), (0, 0, 1)
    # X1 X2 f - X2 X1 f = [X1, X2] f = X3 f
    lhs = f.apply_lie(X2).apply_lie(X1) - f.apply_lie(X1).apply_lie(X2)
    assert lhs.max_abs_diff(f.apply_lie(X3)) < 1e-12
