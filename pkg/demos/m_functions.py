"""
Titchmarsh-Weyl m-functions of constant potentials
==================================================

A constant potential has a closed-form m-function. We compare it with the
general transfer-matrix solver and watch a constant gauge rotation act on m.
"""

import numpy as np

from refless import ConstantPotential, GaugeElement, alpha_action, chordal, constant_m, m_plus, rotation

##############################################################################
# The extreme potential with W12 = -1 has m(2i) = i (sqrt5 - 1) / 2.

W = ConstantPotential([[0, -1], [-1, 0]])
print("m(2i)      =", m_plus(W, 2j))
print("closed form =", 1j * (np.sqrt(5) - 1) / 2)

##############################################################################
# On a small grid in the upper half plane the solver agrees with the
# closed form.

z = np.linspace(-2, 2, 5) + 0.5j
print("max chordal gap:", np.max(chordal(m_plus(W, z), constant_m(W.matrix, z)[0])))

##############################################################################
# A constant rotation of the potential rotates m by the same angle.

g = GaugeElement.constant(0.4)
print("gauge gap:", np.max(chordal(m_plus(alpha_action(g, W), z), rotation(0.4)(m_plus(W, z)))))
