"""A sum of squares on T^1 x SU(2) built from X1 and X2.

X1 and X2 bracket to X3, so the Lie hull is all of su(2).  The smallest
singular value of the stacked field matrices on each spin-j shell stays
positive, and the quadratic form of the operator is bounded below on every
sampled shell.
"""
from fractions import Fraction

from ghlab.fields import CoefficientMap, LieElement
from ghlab.ghcheck import gh_verdict, hull_checks, shell_minima
from ghlab.operator import FieldTerm, OperatorSpec, TorusField, final_inequality_probe
from ghlab.spectral import GroupSpec
from ghlab.trig import TrigPoly

SU2 = GroupSpec.su2()
X1, X2, X3 = (LieElement.basis(SU2, k) for k in (1, 2, 3))
print("hull of {X1, X2}:", hull_checks([X1, X2]).kind)
print("hull of {X3}:", hull_checks([X3]).kind)
mins = shell_minima([X1, X2], 110)
print("sigma_min by shell:", [round(m.sigma, 3) for m in mins[1:6]], "...")
print("verdict:", gh_verdict(mins).verdict)

a1 = CoefficientMap.line(TrigPoly.constant(1, Fraction(3, 2)) + TrigPoly.cos(1, (1,)), X1).to_float()
a2 = CoefficientMap.line(TrigPoly.constant(1, 2) + TrigPoly.sin(1, (1,)), X2).to_float()
P = OperatorSpec(SU2, 1, "laplacian", (FieldTerm(a1, TorusField.constant((0.5,), False)),
                                       FieldTerm(a2, TorusField.constant((1.0,), False))))
probe = final_inequality_probe(P, 12, trials=3, seed=1)
for lam, r in zip(probe.lams, probe.worst_ratios):
    print(f"  lambda = {float(lam):6.2f}: min <P psi, psi> / |psi|^2 = {r:.3f}")
