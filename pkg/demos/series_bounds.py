"""
Coefficient sequences and bound tables
======================================

The g sequence of an F function obeys |g_n| <= 3^n. The bound tables that
drive the Taylor step sizes are exact rationals.
"""

from fractions import Fraction

import numpy as np

from refless import bound_tables, convex_combination, g_from_F

##############################################################################
# g for a two-atom F and the envelope ratio.

F = convex_combination([(0.3, 0.4), (2.0, 0.6)])
g = g_from_F(F, 12).coefficients
print("max |g_n| / 3^n =", float(np.max(np.abs(g) / 3.0 ** np.arange(1, 13))))

##############################################################################
# Exact bound table at r = 1/2.

T = bound_tables(Fraction(1, 2), 4, 3)
for n in range(1, 5):
    print(n, [str(T.B_exact[n][N]) for N in range(5 - n)])
