"""Irrational slopes: the golden ratio against a Liouville number.

For d1 + a d2 the symbol at frequency (p, q) is |p + a q|.  Badly
approximable a (golden ratio) keeps it above c / q, a polynomial rate.  A
Liouville number has convergents p/q with |q a - p| smaller than any power
of q, so the symbol decays faster than every polynomial along them.
"""
from ghlab.diophantine import (
    LiouvilleSeries, NsaFamily, QuadraticSurd, continued_fraction, convergent_candidates, liouville_witnesses,
    verify_equivalence,
)
from ghlab.ghcheck import convergent_witnesses

phi = QuadraticSurd.golden()
print("golden ratio, continued fraction:", continued_fraction(phi, 8).quotients)
fam = NsaFamily.from_rows([[1, phi]])
for w in convergent_witnesses(fam, depth=8)[-3:]:
    print(f"  xi = {w.xi}: log sigma = {w.log_sigma:.2f}")
v = verify_equivalence(fam, 300)
print("  both conditions hold:", v.g_holds, v.i_holds)

alpha = LiouvilleSeries(10, 9)
print("Liouville number sum 10^(-k!)")
for w in liouville_witnesses(alpha, 5):
    print(f"  k = {w.k}: q = 10^{len(str(w.q)) - 1}, log10 |q alpha - p| ~ {w.log10_gap:.1f}")
fam = NsaFamily.from_rows([[1, alpha]])
v = verify_equivalence(fam, 300, candidates=convergent_candidates(fam))
print("  both conditions fail:", not v.g_holds, not v.i_holds, " agree:", v.agree)
