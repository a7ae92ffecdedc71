"""A non-smooth solution for a failing system.

Put unit mass on the zero-symbol frequencies of d1 + (2/3) d2.  The sum has
constant shell norms, so it is a distribution and not a function, while the
field kills every term exactly.
"""
import math
from fractions import Fraction

from ghlab.ghcheck import build_singular_solution
from ghlab.operator import classify_smoothness
from ghlab.spectral import GroupSpec

T2 = GroupSpec.torus(2)
modes = [(-2 * k, 3 * k) for k in range(1, 21)]
u = build_singular_solution(T2, modes)
norms = u.shell_norms()
print("u:", classify_smoothness([(lam, math.log(n)) for lam, n in norms]).verdict)
Lu = u.image((1, Fraction(2, 3)))
print("L u has", len(Lu), "nonzero coefficients")
