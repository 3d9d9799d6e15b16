"""
Building F functions in the Dirac class
=======================================

Convex combinations of rotations of lambda are exactly the F functions with
F(i) = i. We build one, normalize a second, and inspect its m-functions.
"""

from refless import FFunction, HerglotzRep, convex_combination, dirac_class_test, m_pair_from_F
from refless.canonical import normalize_to_dirac_class

##############################################################################
# Two rotations with weights 0.4 and 0.6.

F = convex_combination([(0.3, 0.4), (2.0, 0.6)])
print("F(i) =", F(1j), " in class:", dirac_class_test(F))

##############################################################################
# A function outside the class becomes a member after a Moebius map.

G = HerglotzRep(1.0, (("inf", 2.0),))
g, G1 = normalize_to_dirac_class(FFunction.analytic(G))
print("normalizing map:", g)
print("normalized F(i) =", FFunction.analytic(G1).at_i())

##############################################################################
# F determines both half-line m-functions.

mp, mm = m_pair_from_F(F, 1.5j)
print("m+(1.5i) =", mp, " m-(1.5i) =", mm)
