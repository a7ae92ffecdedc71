"""Constant fields on T^2: when does a pair of directions control every frequency?

A single rational direction d1 + a d2 misses a whole line of frequencies:
its symbol vanishes there, so a distribution concentrated on that line is
annihilated while being far from smooth.  Adding a second, independent
direction closes the gap, and the smallest symbol on each shell grows like
sqrt(lambda).
"""
from fractions import Fraction

from ghlab.fields import LieElement
from ghlab.ghcheck import gh_verdict, lower_bound_check, shell_minima
from ghlab.spectral import GroupSpec

T2 = GroupSpec.torus(2)
alpha, beta = Fraction(1, 2), Fraction(1, 3)

print("single field d1 + (1/2) d2")
mins = shell_minima([LieElement(T2, (1, alpha))], 400)
rep = gh_verdict(mins)
print("  verdict:", rep.verdict)
print("  first resonant frequencies:", rep.witnesses[:4])

print("pair {d1 + (1/2) d2, (1/3) d1 + d2}")
rows = [(1, alpha), (beta, 1)]
mins = shell_minima([LieElement(T2, r) for r in rows], 10 ** 4)
rep = gh_verdict(mins)
ratio = min(m.sigma / float(m.lam) ** 0.5 for m in mins if m.lam > 0)
print("  verdict:", rep.verdict, " min sigma / sqrt(lambda):", round(ratio, 4))
chk = lower_bound_check(mins, rows)
print(f"  sigma_min^2 >= {chk.s_min_sq:.4f} * lambda checked exactly on {chk.n_checked} shells,"
      f" violations: {chk.n_violations}")
