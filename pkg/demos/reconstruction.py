"""
Reconstructing a potential from F
=================================

The Taylor march recovers W from F. Feeding the result back through the
forward solver closes the loop.
"""

import numpy as np

from refless import convex_combination, forward_validate, reconstruct_potential, thm41_check

##############################################################################
# Half of lambda plus half of -1/lambda.

F = convex_combination([(0.0, 0.5), (np.pi / 2, 0.5)])
R = reconstruct_potential(F, x_max=0.5)
print("steps:", R.report["steps"], " tail budget:", R.report["tail_budget"])

##############################################################################
# The trace-zero coefficients stay inside the unit disk.

print("max a^2 + b^2 =", float(np.max(R.a ** 2 + R.b ** 2)))
print("bound check ok:", thm41_check(R.potential.trace_zero(), R.x[::10], F=F).ok)

##############################################################################
# Forward validation compares the m-function of R with the one F predicts.

print("forward residual:", forward_validate(R, F))
