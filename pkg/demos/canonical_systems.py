"""
Canonical systems and the K matrix
==================================

Every Dirac operator corresponds to a canonical system with det H = 1. The
norm of K reaches 2 only at the extreme potentials.
"""

import numpy as np

from refless import beta_potential, canonical_to_dirac, dirac_to_canonical, k_matrix, normalize_offdiag

##############################################################################
# Round trip through the canonical system.

W = beta_potential(0.7)
grid = np.linspace(0, 2, 201)
H = dirac_to_canonical(W, grid)
back = canonical_to_dirac(H)(grid)
ref = normalize_offdiag(W, (0.0, 2.0))[0](grid)
print("round trip error:", float(np.max(np.abs(back - ref))))

##############################################################################
# K has norm 2 for W_beta at every point.

print("|K| =", [round(k_matrix(H, x).norm, 12) for x in (0.0, 0.5, 1.5)])
