import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from refless import (FFunction, F_from_potential, HerglotzRep, beta_potential,
                     convex_combination, dirac_class_test, extreme_potential, lemma61_check, m_pair_from_F,
                     reflectionless_defect, rotation, seam_mismatch, thm41_check, thm42_check)
from refless.errors import BadWeights, InputError, SlitInput
from refless.reflectionless import richardson_limit

from conftest import bumped_beta, random_atoms

GOLD = (math.sqrt(5) - 1) / 2
F_LAM = HerglotzRep(0.0, (("inf", 1.0),))
F_NEG_INV = HerglotzRep(0.0, ((0.0, 1.0),))


# m_pair_from_F ---------------------------------------------------------------


def test_m_pair_of_lambda():
    mp, mm = m_pair_from_F(F_LAM, 2j)
    assert abs(mp - GOLD * 1j) < 1e-12
    assert abs(mm - 1j / GOLD) < 1e-12


def test_m_pair_of_minus_inverse():
    mp, _ = m_pair_from_F(F_NEG_INV, 2j)
    assert abs(mp - 1j / GOLD) < 1e-12
    assert abs(mp + 1 / (GOLD * 1j)) < 1e-12


def test_m_plus_tends_to_F_at_i(two_atom_F):
    mp, _ = m_pair_from_F(two_atom_F, 1e3j)
    assert abs(mp - two_atom_F(1j)) < 1e-2
    mp6, _ = m_pair_from_F(two_atom_F, 1e6j)
    assert abs(mp6 - 1j) < 1e-5


def test_m_pair_herglotz(rng):
    F = convex_combination(random_atoms(rng))
    z = rng.uniform(-3, 3, 100) + 1j * rng.uniform(0.01, 3, 100)
    mp, mm = m_pair_from_F(F, z)
    assert np.all(mp.imag > 0) and np.all(mm.imag > 0)


def test_m_pair_slit():
    with pytest.raises(SlitInput):
        m_pair_from_F(F_LAM, 0.5)


# F_from_potential -------------------------------------------------------------


def test_F_of_extreme_is_lambda():
    W = extreme_potential(0.0)
    for lam in (0.5j, 2j * (1 + 1e-3)):
        assert abs(F_from_potential(W, lam) - lam) < 1e-6


@pytest.mark.parametrize("theta", [0.3, 1.2, 2.9])
def test_F_of_extreme_is_rotation(theta):
    W = extreme_potential(theta)
    R = rotation(theta)
    for lam in (0.4j, 0.3 + 0.5j, -1.5 + 2j):
        assert abs(F_from_potential(W, lam) - R(lam)) < 1e-6


def test_beta_family_matches_extreme():
    for beta in (0.2, 1.0, 2.5):
        a = beta_potential(beta).matrix
        b = extreme_potential((math.pi - beta) / 2).matrix
        assert np.allclose(a, b, atol=1e-15)


def test_extreme_special_angles():
    assert np.allclose(extreme_potential(0).matrix, [[0, -1], [-1, 0]], atol=1e-15)
    W = extreme_potential(math.pi / 2)
    assert np.allclose(W.matrix, [[0, 1], [1, 0]], atol=1e-15)
    assert abs(F_from_potential(W, 0.4j) - (-1 / 0.4j)) < 1e-6


def test_numeric_F_at_i_for_dirac_class():
    for beta in (0.1, 1.3):
        assert abs(FFunction.from_potential(beta_potential(beta)).at_i() - 1j) < 1e-6


def test_seam_consistency():
    assert seam_mismatch(beta_potential(0.9), 0.8) < 1e-5


def test_seam_flags_bump():
    assert seam_mismatch(bumped_beta(), 0.8) > 1e-3


def test_F_from_potential_rejects_seam():
    with pytest.raises(InputError):
        F_from_potential(beta_potential(0.3), 1j)


# reflectionless_defect --------------------------------------------------------


def test_defect_beta():
    assert reflectionless_defect(beta_potential(0.6), [-3, -1.5, 1.5, 3]) < 1e-5


def test_defect_from_F(two_atom_F):
    assert reflectionless_defect(two_atom_F, [-2.5, -1.2, 1.2, 2.5]) < 1e-8


def test_defect_bump():
    assert reflectionless_defect(bumped_beta(), [-3, -1.5, 1.5, 3]) > 1e-2


def test_defect_input_checks():
    with pytest.raises(InputError):
        reflectionless_defect(F_LAM, [0.5])
    with pytest.raises(InputError):
        reflectionless_defect(F_LAM, [2.0], y_sequence=(1e-3, 1e-2))


def test_richardson_exact_for_quadratics():
    y = np.array([0.1, 0.05, 0.02, 0.01])
    v = (1 + 2j) + 3 * y - (1 - 1j) * y ** 2
    assert abs(richardson_limit(y, v) - (1 + 2j)) < 1e-12


# dirac_class_test / convex_combination ----------------------------------------


def test_dirac_class():
    assert dirac_class_test(F_LAM)
    assert not dirac_class_test(HerglotzRep(0.0, (("inf", 2.0),)))
    assert dirac_class_test(convex_combination([(0.3, 0.2), (1.0, 0.5), (2.0, 0.3)]))


def test_single_atom_is_rotation():
    F = convex_combination([(0.7, 1.0)])
    R = rotation(0.7)
    for lam in (0.3j, 1 + 1j, -2 + 0.5j):
        assert abs(F(lam) - R(lam)) < 1e-13


def test_half_half(half_half_F):
    for lam in (0.3j, 1 + 1j, -2 + 0.5j):
        assert abs(half_half_F(lam) - (lam - 1 / lam) / 2) < 1e-14
    assert abs(half_half_F(1j) - 1j) < 1e-15


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 3.14), st.floats(0.05, 1)), min_size=1, max_size=5,
                unique_by=lambda a: round(a[0], 6)))
def test_any_combination_in_dirac_class(raw):
    total = sum(w for _, w in raw)
    atoms = [(t, w / total) for t, w in raw]
    atoms[-1] = (atoms[-1][0], 1 - math.fsum(w for _, w in atoms[:-1]))
    assert dirac_class_test(convex_combination(atoms), tol=1e-12)


@pytest.mark.parametrize("atoms", [[], [(0.1, 0.5)], [(0.1, 0.5), (0.2, -0.5), (0.3, 1.0)],
                                   [(0.1, 0.5), (0.1, 0.5)], [(3.5, 1.0)], [(0.1, 0.0), (0.2, 1.0)]])
def test_bad_weights(atoms):
    with pytest.raises(BadWeights):
        convex_combination(atoms)


# bound checks -----------------------------------------------------------------


def test_thm41_beta_equality():
    rep = thm41_check(beta_potential(0.4), np.linspace(-2, 2, 9))
    assert rep.ok and rep.flags["equality"]


def test_thm41_derivative_identity():
    W = extreme_potential(math.pi / 2)
    rep = thm41_check(W, [0.0], F=F_NEG_INV)
    assert rep.ok
    dF = FFunction.analytic(F_NEG_INV).derivative_at_i()
    assert abs(dF + 1) < 1e-12


def test_thm41_two_atom_reconstruction(two_atom_F):
    from refless import reconstruct_potential
    R = reconstruct_potential(two_atom_F, x_max=0.5)
    W = R.potential.trace_zero()
    x = np.linspace(0, 0.5, 11)
    rep = thm41_check(W, x, F=two_atom_F)
    assert rep.ok and not rep.flags["equality"]
    assert np.all(R.a ** 2 + R.b ** 2 < 1)


def test_thm41_rejects_wrong_gauge():
    from refless import ConstantPotential
    with pytest.raises(InputError):
        thm41_check(ConstantPotential([[1.0, 0.0], [0.0, 0.0]]), [0.0])


def test_derivative_quadrature_vs_finite_difference(rng):
    F = FFunction.analytic(convex_combination(random_atoms(rng)).rep)
    h = 1e-4
    fd = np.mean([(F(1j + h * u) - F(1j - h * u)) / (2 * h * u)
                  for u in np.exp(1j * np.linspace(0, math.pi, 8, endpoint=False))])
    assert abs(F.derivative_at_i() - fd) < 1e-8


def test_thm42_examples():
    r = thm42_check(0, 1, 0, 0)
    assert r.lhs == 4 and r.ok and r.equality()
    r = thm42_check(0, -1, 0, 0)
    assert r.lhs == 0 and r.ok and not r.equality()
    assert thm42_check(0, 0, 0, 0).lhs == 0
    assert not thm42_check(0, 1, 0, 0.5).ok


def test_lemma61_random(rng):
    for _ in range(5):
        rep = lemma61_check(convex_combination(random_atoms(rng)), N_max=12)
        assert rep.ok
