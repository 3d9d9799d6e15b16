import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from refless import (ConstantPotential, FunctionPotential, GaugeElement, SampledPotential, alpha_action,
                     beta_potential, chordal, constant_m, gap_parameters, gauge_between, group_action,
                     m_minus, m_plus, moebius_apply, normalize_offdiag, reflect, rotation, shift,
                     shift_scale, transfer_matrix)
from refless.dirac import J, WeylInfo
from refless.errors import (DegenerateEigenbasis, DomainExceeded, GridTooCoarse, NonDifferentiableAlpha,
                            NotEquivalent, NotUpperHalfPlane)

from conftest import gauged, random_alpha, smooth_potential

GOLD = (math.sqrt(5) - 1) / 2
W_MINUS = ConstantPotential([[0, -1], [-1, 0]])
W_PLUS = ConstantPotential([[0, 1], [1, 0]])
ZERO = ConstantPotential(np.zeros((2, 2)))


def solve_ivp_T(W, x, z):
    def rhs(t, y):
        Y = y.reshape(2, 2)
        return (J @ (W(t) + z * np.eye(2)) @ Y).ravel()
    sol = solve_ivp(rhs, (0, x), np.eye(2, dtype=complex).ravel(), method="DOP853", rtol=1e-12, atol=1e-13)
    return sol.y[:, -1].reshape(2, 2)


# -- transfer matrices -------------------------------------------------------

def test_free_transfer_matrix():
    assert np.allclose(transfer_matrix(ZERO, 1.3, 0.0), np.eye(2))
    for z in (0.7, -1.2):
        assert np.allclose(transfer_matrix(ZERO, 2.0, z), expm(z * J * 2.0), atol=1e-11)


def test_transfer_matrix_det_and_oracle(rng):
    W = smooth_potential()
    xs = rng.uniform(0, 5, 5)
    T = transfer_matrix(W, xs, 1 + 1j)
    assert np.max(np.abs(np.linalg.det(T) - 1)) < 1e-10
    assert np.allclose(T[0], solve_ivp_T(W, xs[0], 1 + 1j), atol=1e-8)
    Tn = transfer_matrix(W, -0.8, 0.5 + 0.2j)
    assert np.allclose(Tn, solve_ivp_T(W, -0.8, 0.5 + 0.2j), atol=1e-8)


def test_transfer_matrix_real_for_real_z():
    T = transfer_matrix(smooth_potential(), 1.5, 0.4)
    assert np.max(np.abs(T.imag)) < 1e-14


def test_transfer_matrix_domain():
    W = SampledPotential([0, 1], [np.eye(2), np.eye(2)])
    with pytest.raises(DomainExceeded):
        transfer_matrix(W, 2.0, 1j)


# -- m functions ---------------------------------------------------------------

def test_m_plus_anchor():
    assert m_plus(W_MINUS, 2j) == pytest.approx(1j * GOLD, abs=1e-10)


def test_free_m():
    assert m_plus(ZERO, 1 + 3j) == pytest.approx(1j, abs=1e-12)
    assert m_minus(ZERO, 2j) == pytest.approx(1j, abs=1e-12)
    assert m_plus(ZERO, 1 + 3j, method="doubling") == pytest.approx(1j, abs=1e-9)


def test_m_minus_anchor():
    assert m_minus(W_MINUS, 2j) == pytest.approx(1j / GOLD, abs=1e-10)
    assert m_minus(W_MINUS, 2j, method="doubling") == pytest.approx(1j / GOLD, abs=1e-9)


def test_even_diagonal_potential_has_equal_m():
    W = ConstantPotential(np.diag([0.4, -0.9]))
    for z in (2j, 0.5 + 1j):
        assert m_minus(W, z) == pytest.approx(m_plus(W, z), abs=1e-9)


def test_m_minus_is_m_plus_of_reflection():
    W = smooth_potential()
    z = 0.3 + 1.1j
    assert m_minus(W, z) == pytest.approx(m_plus(reflect(W), z), abs=1e-12)


@pytest.mark.parametrize("beta", [0.0, 0.9, 2.2])
def test_beta_potentials_against_closed_form(beta):
    W = beta_potential(beta)
    mp, _ = constant_m(W.matrix, 5j)
    assert m_plus(W, 5j, method="doubling") == pytest.approx(mp, abs=1e-9)


def test_constant_m_examples():
    assert np.allclose(constant_m(np.zeros((2, 2)), 1j), (1j, 1j))
    mp, _ = constant_m([[0, 1], [1, 0]], 2j)
    assert mp == pytest.approx(1j / GOLD)
    assert mp == pytest.approx(-1 / (1j * GOLD))
    with pytest.raises(NotUpperHalfPlane):
        constant_m(np.zeros((2, 2)), 1.0)


def test_constant_m_branch_point():
    with pytest.raises(DegenerateEigenbasis):
        constant_m(np.zeros((2, 2)), 0j + 1e-300j)


def test_m_plus_doubling_vs_closed_form(rng):
    W0 = np.array([[0.3, 0.7], [0.7, -0.2]])
    W = ConstantPotential(W0)
    z = rng.normal(0, 2, 20) + 1j * rng.uniform(0.3, 3, 20)
    assert np.allclose(m_plus(W, z, method="doubling"), constant_m(W0, z)[0], atol=1e-9)
    assert np.allclose(m_plus(W, z), constant_m(W0, z)[0], atol=1e-10)


def test_weyl_contraction_is_monotone():
    info = WeylInfo("")
    m_plus(smooth_potential(), 0.4 + 0.5j, method="doubling", info=info)
    d = info.differences
    assert len(d) >= 2 and all(b < a for a, b in zip(d, d[1:]))


def test_herglotz_property(rng):
    z = rng.normal(0, 3, 50) + 1j * rng.uniform(0.05, 4, 50)
    for W in (smooth_potential(), W_MINUS, beta_potential(1.1)):
        assert np.all(np.imag(m_plus(W, z)) > 0)
        assert np.all(np.imag(m_minus(W, z)) > 0)


def test_m_plus_rejects_lower_half_plane():
    with pytest.raises(NotUpperHalfPlane):
        m_plus(ZERO, 1 - 1j)


# -- gauge actions -------------------------------------------------------------

def test_alpha_zero_is_identity():
    W = smooth_potential()
    x = np.linspace(-1, 3, 9)
    assert np.allclose(alpha_action(GaugeElement.constant(0.0), W)(x), W(x))


def test_constant_alpha_is_conjugation():
    W = smooth_potential()
    R = rotation(0.6).matrix.real
    x = np.linspace(0, 2, 5)
    assert np.allclose(alpha_action(GaugeElement.constant(0.6), W)(x), R @ W(x) @ R.T)


def test_linear_alpha_on_free_potential():
    g = GaugeElement.function(lambda x: np.asarray(x, float), lambda x: np.ones(np.shape(x)))
    Wp = alpha_action(g, ZERO)
    assert np.allclose(Wp(np.linspace(0, 3, 4)), np.eye(2))
    Wc = FunctionPotential(Wp, 0, 10, right_const=(10, np.eye(2)))
    assert m_plus(Wc, 2j) == pytest.approx(1j, abs=1e-9)


def test_gauge_invariance_of_m_plus(rng):
    W = smooth_potential()
    for _ in range(3):
        Wa = gauged(random_alpha(rng), W)
        z = rng.normal(0, 1, 10) + 1j * rng.uniform(0.5, 2, 10)
        assert np.max(chordal(m_plus(Wa, z), m_plus(W, z))) < 1e-7


def test_nonzero_alpha0_rotates_m():
    W = smooth_potential()
    th = 0.5
    Wa = alpha_action(GaugeElement.constant(th), W)
    z = 0.2 + 1.3j
    assert m_plus(Wa, z) == pytest.approx(moebius_apply(rotation(th), m_plus(W, z)), abs=1e-9)
    assert -m_minus(Wa, z) == pytest.approx(moebius_apply(rotation(th), -m_minus(W, z)), abs=1e-9)


def test_group_composition_law(rng):
    W = smooth_potential()
    a, b = random_alpha(rng), random_alpha(rng)
    A = GaugeElement.function(a.alpha, a.dalpha, t=0.3)
    B = GaugeElement.function(b.alpha, b.dalpha, t=-0.2)
    x = np.linspace(0, 1.5, 13)
    lhs = group_action(A * B, W)(x)
    rhs = group_action(A, group_action(B, W))(x)
    assert np.max(np.abs(lhs - rhs)) < 1e-12
    e = GaugeElement.constant(0.0)
    assert np.allclose(group_action(e, W)(x), W(x), atol=0)


def test_shift_action():
    W = smooth_potential()
    x = np.linspace(0, 1, 5)
    assert np.allclose(shift(W, 0.4)(x), W(x + 0.4))


def test_cocycle_identity(rng):
    W = smooth_potential()
    g = random_alpha(rng)
    t, z = 0.4, 2j
    lhs = m_plus(shift(alpha_action(g, W), t), z)
    rhs = moebius_apply(rotation(float(g.alpha(t))), m_plus(shift(W, t), z))
    assert abs(lhs - rhs) < 1e-7


def test_sampled_alpha_needs_grid():
    with pytest.raises(NonDifferentiableAlpha):
        GaugeElement.sampled([0.0], [0.0])


def test_normalize_offdiag_trivial():
    W = FunctionPotential(lambda x: np.broadcast_to(np.array([[0, 0.5], [0.5, -0.3]]), np.shape(x) + (2, 2)), 0, 3)
    Wn, al = normalize_offdiag(W)
    x = np.linspace(0, 3, 7)
    assert np.max(np.abs(al.alpha(x))) < 1e-12
    assert np.allclose(Wn(x), W(x), atol=1e-12)


def test_normalize_offdiag_identity_potential():
    W = FunctionPotential(lambda x: np.broadcast_to(np.eye(2), np.shape(x) + (2, 2)), 0, 3)
    Wn, al = normalize_offdiag(W)
    x = np.linspace(0, 3, 7)
    assert np.allclose(al.alpha(x), -x, atol=1e-10)
    assert np.max(np.abs(Wn(x))) < 1e-9


def test_normalize_offdiag_beta_potential():
    W = beta_potential(0.7)
    Wn, al = normalize_offdiag(W, (0.0, 3.0))
    x = np.linspace(0, 3, 31)
    assert np.max(np.abs(Wn(x)[:, 0, 0])) < 1e-9
    assert Wn.gauge == "offdiag_zero"
    # freeze the angle beyond 3 so the continuation stays in the same gauge class
    R = rotation(float(al.alpha(3.0))).matrix.real
    Wc = FunctionPotential(Wn, 0, 3, right_const=(3.0, R @ W.matrix @ R.T))
    assert m_plus(Wc, 2j) == pytest.approx(m_plus(W, 2j), abs=1e-7)


def test_gauge_between_recovers_alpha(rng):
    W = smooth_potential()
    grid = np.linspace(0, 2, 201)
    for _ in range(3):
        g = random_alpha(rng)
        rec = gauge_between(W, alpha_action(g, W), grid)
        d = (rec.alpha(grid) - g.alpha(grid) + math.pi / 2) % math.pi - math.pi / 2
        assert np.max(np.abs(d)) < 1e-8


def test_gauge_between_free_and_identity():
    grid = np.linspace(0, 2, 101)
    Id = FunctionPotential(lambda x: np.broadcast_to(np.eye(2), np.shape(x) + (2, 2)))
    rec = gauge_between(ZERO, Id, grid)
    assert np.allclose(rec.alpha(grid), grid, atol=1e-8)


def test_gauge_between_not_equivalent():
    with pytest.raises(NotEquivalent):
        gauge_between(W_MINUS, W_PLUS, np.linspace(0, 2, 101))


def test_gauge_between_coarse_grid():
    Id = FunctionPotential(lambda x: np.broadcast_to(np.eye(2), np.shape(x) + (2, 2)))
    with pytest.raises(GridTooCoarse):
        gauge_between(ZERO, Id, np.linspace(0, 10, 5))


def test_shift_scale():
    W = smooth_potential()
    x = np.linspace(0, 1, 5)
    assert np.allclose(shift_scale(W, 0.0, 1.0)(x), W(x))
    assert m_plus(shift_scale(ZERO, 1.0, 1.0), 2j) == pytest.approx(1j, abs=1e-10)
    W0 = np.array([[0.2, 0.6], [0.6, -0.4]])
    a, g = 0.3, 2.0
    Wg = shift_scale(ConstantPotential(W0), a, g)
    z = 3j
    assert m_plus(Wg, z) == pytest.approx(constant_m(W0, z / g + a)[0], abs=1e-8)


def test_gap_parameters_reduce_to_unit_gap():
    a, g = gap_parameters(2.0, 5.0)
    # z in the gap (c, d) maps onto (-1, 1) by z -> z/g + a ... inverse transport
    for zc, target in ((2.0, -1.0), (5.0, 1.0)):
        assert (zc - a) * g == pytest.approx(target)
