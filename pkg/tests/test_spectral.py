import numpy as np
import pytest
from fractions import Fraction

from ghlab.spectral import (
    GroupSpec, SU2Mode, casimir_residual, eigenvalue, enumerate_shells, field_action,
    lattice_points, rep_block, spin_matrices, weyl_partial_sums,
)


def test_torus_shells_counts_sum_of_two_squares():
    shells = enumerate_shells(GroupSpec.torus(2), 25)
    dims = {int(s.eigenvalue): len(s.modes) for s in shells}
    # r_2(n): 1, 4, 4, 0, 4, 8, 0, 0, 4, 4, 8, ..., 25 -> 12
    assert dims[0] == 1 and dims[1] == 4 and dims[2] == 4 and dims[5] == 8 and dims[25] == 12
    assert 3 not in dims
    assert sum(dims.values()) == len(lattice_points(2, 25))


def test_torus_modes_lexicographic():
    for s in enumerate_shells(GroupSpec.torus(3), 12):
        assert list(s.modes) == sorted(s.modes)


def test_su2_shells_dimensions():
    shells = enumerate_shells(GroupSpec.su2(), Fraction(15, 4))
    assert [s.eigenvalue for s in shells] == [0, Fraction(3, 4), 2, Fraction(15, 4)]
    assert [len(s.modes) for s in shells] == [1, 4, 9, 16]
    assert eigenvalue(GroupSpec.su2(), SU2Mode(3, 1, 1)) == Fraction(15, 4)


def test_structure_constants_of_spin_matrices():
    for tj in range(5):
        X1, X2, X3 = spin_matrices(tj)
        assert np.allclose(X1 @ X2 - X2 @ X1, X3)
        assert np.allclose(X2 @ X3 - X3 @ X2, X1)
        assert np.allclose(X3 @ X1 - X1 @ X3, X2)


def test_field_action_anti_hermitian_and_norm_bound():
    G = GroupSpec.su2()
    for s in enumerate_shells(G, 30):
        for k in range(3):
            X = tuple(1.0 if i == k else 0.0 for i in range(3))
            A = field_action(X, s)
            assert np.abs(A + A.conj().T).max() <= 1e-12
            assert np.linalg.norm(A, 2) <= float(s.eigenvalue) ** 0.5 + 1e-12


def test_casimir_residual_small():
    for G in (GroupSpec.su2(), GroupSpec.torus(2)):
        for s in enumerate_shells(G, 50):
            assert casimir_residual(G, s) <= 1e-10


def test_torus_field_action_is_diagonal():
    s = [s for s in enumerate_shells(GroupSpec.torus(2), 5) if s.eigenvalue == 5][0]
    A = field_action((1, Fraction(1, 2)), s)
    assert np.allclose(np.diag(A), [1j * (x + y / 2) for x, y in s.modes])


def test_weyl_sums_monotone_and_bounded():
    for G in (GroupSpec.torus(2), GroupSpec.su2()):
        lams, sums = weyl_partial_sums(G, 10 ** 4)
        assert np.all(np.diff(sums) >= 0)
        _, sums_small = weyl_partial_sums(G, 10 ** 3)
        assert sums[-1] - sums_small[-1] < 1e-3 * sums[-1]


def test_bad_inputs():
    with pytest.raises(ValueError):
        GroupSpec.torus(0)
    with pytest.raises(ValueError):
        rep_block((1, 0), 2)
    with pytest.raises(ValueError):
        enumerate_shells(GroupSpec.torus(1), -1)
