import math

import numpy as np
import pytest

from refless import (FunctionPotential, GaugeElement, HerglotzRep, alpha_action, beta_potential,
                     convex_combination, rotation)


def dyadic_weights(rng, n, bits=20):
    """Positive weights ``k / 2**bits`` whose float sum is exactly one."""
    cuts = np.sort(rng.choice(np.arange(1, 2 ** bits), n - 1, replace=False))
    k = np.diff(np.concatenate([[0], cuts, [2 ** bits]]))
    return k / 2.0 ** bits


def random_atoms(rng, n_max=4):
    n = int(rng.integers(1, n_max + 1))
    theta = rng.uniform(0, math.pi, n)
    return list(zip(theta, dyadic_weights(rng, n)))


def random_rep(rng, n_max=4, normalized=True):
    n = int(rng.integers(1, n_max + 1))
    t = rng.normal(0, 2, n)
    w = dyadic_weights(rng, n) if normalized else rng.uniform(0.1, 2, n)
    return HerglotzRep(0.0 if normalized else float(rng.normal()), tuple(zip(t, w)))


def smooth_potential():
    """Nonconstant, full-line potential with constant tails beyond [-1, 2]."""
    def fn(x):
        x = np.asarray(x, dtype=float)
        s = np.clip(x, -1, 2)
        out = np.zeros(x.shape + (2, 2))
        out[..., 0, 0] = 0.3 * np.sin(2 * s)
        out[..., 0, 1] = out[..., 1, 0] = 0.5 + 0.2 * np.cos(s)
        out[..., 1, 1] = -0.1 * s
        return out
    return FunctionPotential(fn, -1, 2, left_const=(-1, fn(-1.0)), right_const=(2, fn(2.0)))


def random_alpha(rng, x_end=3.0):
    """Random angle in the normalized gauge class, constant beyond ``x_end``."""
    c = rng.normal(0, 1.0, 2)

    def al(x):
        u = np.pi * np.clip(np.asarray(x, dtype=float), 0, x_end) / x_end
        s = (1 - np.cos(u)) / 2
        return c[0] * s + c[1] * s * s

    def da(x):
        x = np.asarray(x, dtype=float)
        u = np.pi * np.clip(x, 0, x_end) / x_end
        s = (1 - np.cos(u)) / 2
        ds = np.where((x > 0) & (x < x_end), np.pi * np.sin(u) / (2 * x_end), 0.0)
        return (c[0] + 2 * c[1] * s) * ds
    return GaugeElement.function(al, da)


def gauged(g, W, x_end=3.0):
    """``alpha . W`` with its constant right tail made explicit."""
    R = rotation(float(g.alpha(x_end))).matrix.real
    return FunctionPotential(alpha_action(g, W), W.domain[0], x_end, right_const=(x_end, R @ W(x_end) @ R.T))


def bumped_beta(beta=0.7, amp=0.3):
    """``W_beta`` plus a smooth bump supported in ``[0, 1]``."""
    W0 = beta_potential(beta).matrix

    def fn(x):
        x = np.asarray(x, dtype=float)
        s = np.clip(x, 0, 1)
        bump = amp * np.sin(np.pi * s) ** 4
        out = np.broadcast_to(W0, x.shape + (2, 2)).copy()
        out[..., 0, 1] += bump
        out[..., 1, 0] += bump
        return out
    return FunctionPotential(fn, 0, 1, left_const=(0, W0), right_const=(1, W0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def two_atom_F():
    return convex_combination([(0.3, 0.4), (2.0, 0.6)])


@pytest.fixture(scope="session")
def half_half_F():
    return convex_combination([(0.0, 0.5), (math.pi / 2, 0.5)])


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
