"""Numerics for reflectionless Dirac operators and canonical systems on ``R \\ [-1, 1]``."""

from .errors import *  # noqa: F401,F403
from .herglotz import (INF, HerglotzRep, MoebiusMap, chordal, disk_coeff_transform, herglotz_distance,
                       herglotz_eval, moebius_apply, phi, phi_expansion_coeff, phi_inverse, rotation,
                       rotation_form, taylor_at_i)
from .dirac import (ConstantPotential, DiracPotential, FunctionPotential, GaugeElement, SampledPotential,
                    alpha_action, constant_m, gap_parameters, gauge_between, group_action, m_minus,
                    m_plus, normalize_offdiag, reflect, shift, shift_scale, transfer_matrix)
from .canonical import (CanonicalSystem, canonical_to_dirac, det_normalize, dirac_to_canonical,
                        k_matrix, normalize_to_dirac_class, psl2_action)
from .reflectionless import (CheckReport, FFunction, F_from_potential, beta_potential, convex_combination,
                             dirac_class_test, extreme_potential, lemma61_check, m_pair_from_F,
                             reflectionless_defect, seam_mismatch, thm41_check, thm42_check, thm52_check)
from .series import (BoundTable, CoeffTable, SeriesAtInfinity, bound_tables, cauchy_coeffs,
                     derivative_cascade, f_evolution_rhs, f_from_F, g_evolution_rhs, g_from_F)
from .reconstruct import (MarchState, Reconstruction, TaylorPatchPotential, forward_validate,
                          reconstruct_potential, taylor_step_parameters)

__version__ = "0.1.0"
