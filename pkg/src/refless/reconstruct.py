"""Recover a Dirac potential from its F function by Taylor marching.

The right half-line m-function of the shifted potential, written as
``m_+(t; -1/w) = i + sum g_n(t) w^n``, determines the potential through
``g_1(t) = q(t) + i p(t)``.  The coefficients obey a quadratic evolution
system whose normalized t-derivatives come from
:func:`refless.series.derivative_cascade`; summing them advances the
state by a step well inside the guaranteed radius of analyticity.

The cascade loses one order of depth per step, so the state is re-seeded
periodically: the m-function samples on the quadrature circle are carried
across the reconstructed segment by its transfer matrix and re-expanded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import _magnus
from .dirac import DiracPotential, FunctionPotential
from .errors import BoundViolation, InputError, NotDiracClass
from .herglotz import chordal, circle_nodes, coefficients_from_samples, mobius
from .reflectionless import F_from_potential, as_F
from .series import SeriesAtInfinity, derivative_cascade

DEFAULT_LAMBDA = tuple(1j + 0.3 * np.exp(1j * a) for a in (-math.pi / 2, -math.pi / 4, -3 * math.pi / 4))
ENVELOPE_SLACK = 0.1


class StepParameters(NamedTuple):
    """Majorant ``C M^N`` of ``|g_1^{(N)}|/N!`` and the step ``dt = rho/M``."""

    C: float
    M: float
    dt: float

    def tail_bound(self, N_max: int) -> float:
        """``sum_{N > N_max} C (M dt)^N``; infinite when ``M dt >= 1``."""
        x = self.M * self.dt
        if x >= 1:
            return math.inf
        return self.C * x ** (N_max + 1) / (1 - x)


def taylor_step_parameters(r: float = 1.0, rho: float = 0.5) -> StepParameters:
    if not r > 0:
        raise InputError("r must be positive")
    if not 0 < rho <= 1:
        raise InputError("rho must lie in (0, 1]")
    C, M = 3 / r, 15 / r
    return StepParameters(C, M, rho / M)


@dataclass
class MarchState:
    t: float
    g: np.ndarray
    dt: float
    n_max: int
    N_max: int
    tail: float = 0.0


class TaylorPatchPotential(DiracPotential):
    """Offdiag-zero potential ``(0 q; q -2p)`` stored as Taylor patches of ``q + i p``.

    Patch ``k`` covers ``[starts[k], starts[k+1]]`` and carries coefficients
    of ``g_1(starts[k] + s)`` in powers of ``s``.  The gauge angle
    ``alpha = int_0^x p`` is integrated exactly patch by patch.
    """

    kind = "taylor_patches"

    def __init__(self, starts, end: float, coeffs, **tails):
        starts = np.asarray(starts, dtype=float)
        coeffs = np.asarray(coeffs, dtype=complex)
        super().__init__(0.0, float(end), "offdiag_zero", breakpoints=list(starts[1:]), **tails)
        self.starts, self.end, self.coeffs = starts, float(end), coeffs
        N = coeffs.shape[1]
        self._acoef = np.zeros((len(starts), N + 1))
        self._acoef[:, 1:] = coeffs.imag / np.arange(1, N + 1)
        self._alpha0 = np.zeros(len(starts))
        for k in range(1, len(starts)):
            self._alpha0[k] = self._alpha0[k - 1] + np.polyval(
                self._acoef[k - 1, ::-1], starts[k] - starts[k - 1])

    def with_tails(self, **tails) -> "TaylorPatchPotential":
        return TaylorPatchPotential(self.starts, self.end, self.coeffs, **tails)

    def _locate(self, x):
        x = np.asarray(x, dtype=float)
        k = np.clip(np.searchsorted(self.starts, x, side="right") - 1, 0, len(self.starts) - 1)
        return x, k, x - self.starts[k]

    def g1(self, x):
        """``q(x) + i p(x)``."""
        x, k, s = self._locate(x)
        c = self.coeffs[k]
        out = np.zeros(x.shape, dtype=complex)
        for j in range(c.shape[-1] - 1, -1, -1):
            out = out * s + c[..., j]
        return out

    def pq(self, x):
        g = self.g1(x)
        return g.imag, g.real

    def alpha(self, x):
        x, k, s = self._locate(x)
        a = self._acoef[k]
        out = np.zeros(x.shape)
        for j in range(a.shape[-1] - 1, -1, -1):
            out = out * s + a[..., j]
        return out + self._alpha0[k]

    def ab(self, x):
        """Trace-zero gauge ``(a, b)``: ``(p, q)`` rotated by ``2 alpha``."""
        p, q = self.pq(x)
        c, s = np.cos(2 * self.alpha(x)), np.sin(2 * self.alpha(x))
        return p * c - q * s, p * s + q * c

    def dpq(self, x):
        """``(p', q')`` from the differentiated patch polynomials."""
        x, k, s = self._locate(x)
        c = self.coeffs[k]
        out = np.zeros(x.shape, dtype=complex)
        for j in range(c.shape[-1] - 1, 0, -1):
            out = out * s + j * c[..., j]
        return out.imag, out.real

    def dab(self, x):
        """``(a', b')``; ``alpha' = p`` so ``a' = p' c - q' s - 2 p b`` and ``b' = p' s + q' c + 2 p a``."""
        p, _ = self.pq(x)
        dp, dq = self.dpq(x)
        a, b = self.ab(x)
        c, s = np.cos(2 * self.alpha(x)), np.sin(2 * self.alpha(x))
        return dp * c - dq * s - 2 * p * b, dp * s + dq * c + 2 * p * a

    def _core(self, x):
        p, q = self.pq(x)
        out = np.zeros(np.shape(p) + (2, 2))
        out[..., 0, 1] = out[..., 1, 0] = q
        out[..., 1, 1] = -2 * p
        return out

    def trace_zero(self) -> FunctionPotential:
        def fn(x):
            a, b = self.ab(x)
            out = np.zeros(np.shape(a) + (2, 2))
            out[..., 0, 0], out[..., 1, 1] = a, -a
            out[..., 0, 1] = out[..., 1, 0] = b
            return out
        return FunctionPotential(fn, 0.0, self.end, "trace_zero", list(self.starts[1:]))


@dataclass
class Reconstruction:
    """Output of :func:`reconstruct_potential`.

    ``x, p, q, a, b, alpha`` are samples on the output grid; ``terminal``
    holds the coefficients ``g_n(x_max)`` from the final re-expansion.
    """

    potential: TaylorPatchPotential
    x: np.ndarray
    p: np.ndarray
    q: np.ndarray
    a: np.ndarray
    b: np.ndarray
    alpha: np.ndarray
    terminal: SeriesAtInfinity
    report: dict = field(default_factory=dict)

    def tail_seed(self):
        """``z -> m_+(x_max; z)`` from the terminal series; good for ``|z| >= 2/r``."""
        c = self.terminal.coefficients

        def seed(z):
            w = -1 / np.asarray(z, dtype=complex)
            out = np.zeros(w.shape, dtype=complex)
            for cn in c[::-1]:
                out = (out + cn) * w
            return 1j + out
        return seed


def _expand(samples, rho, n_terms):
    return coefficients_from_samples(samples - 1j, rho, n_terms + 1)[1:]


def _check_envelope(g, r, where):
    n = np.arange(1, len(g) + 1)
    ratio = np.abs(g) / (3 / r) ** n
    worst = float(np.max(ratio))
    if worst > 1 + ENVELOPE_SLACK:
        k = int(np.argmax(ratio)) + 1
        raise BoundViolation(f"|g_{k}| exceeds (3/r)^{k} by a factor {worst:.3g} at t = {where:.6g}")
    return worst


def reconstruct_potential(F, x_max: float = 0.5, n_max: int = 25, N_max: int = 24,
                          rho: float = 0.5, r: float = 1.0, reseed_every: int = 8,
                          n_nodes: int = 128, points_per_step: int = 8,
                          gate_tol: Optional[float] = None, ode_tol: float = 1e-13) -> Reconstruction:
    """March the coefficients ``g_n(t)`` from ``t = 0`` to ``x_max``.

    Parameters
    ----------
    F : FFunction or HerglotzRep
        Must satisfy ``F(i) = i``.
    n_max, N_max : int
        Number of coefficients carried and Taylor order in ``t``;
        ``n_max >= N_max + 1``.
    rho : float
        Safety factor; the step is ``rho r / 15``.
    r : float
        Analyticity radius of ``g`` in ``w``; 1 for spectrum ``R \\ [-1, 1]``.
    reseed_every : int
        Re-expand from propagated circle samples every this many steps
        (and always at ``x_max``).
    points_per_step : int
        Output samples per step.

    Raises
    ------
    NotDiracClass
        If ``F(i) != i``.
    BoundViolation
        If some ``|g_n|`` leaves the envelope ``(3/r)^n`` by more than 10%.
    """
    F = as_F(F)
    if not x_max > 0:
        raise InputError("x_max must be positive")
    if n_max < N_max + 1:
        raise InputError("need n_max >= N_max + 1")
    if reseed_every < 1:
        raise InputError("reseed_every must be >= 1")
    if gate_tol is None:
        gate_tol = 1e-8 if F.is_analytic else 1e-5
    Fi = F.at_i()
    if not abs(Fi - 1j) <= gate_tol:
        raise NotDiracClass(f"F(i) = {Fi} differs from i")
    params = taylor_step_parameters(r, rho)
    radius = r / 2
    w = circle_nodes(0.0, radius, n_nodes)
    z = -1 / w
    samples = np.asarray(F.M(z), dtype=complex)
    n_keep = n_nodes // 2
    full = _expand(samples, radius, n_keep)
    env = _check_envelope(full[:n_max], r, 0.0)
    state = MarchState(0.0, full[:n_max].copy(), params.dt, n_max, N_max)

    starts, coeffs = [], []
    seed_t = 0.0
    steps = reseeds = 0
    cascade_ratio = 0.0
    bound_row = (3 / r) * (15 / r) ** np.arange(N_max + 1)
    while state.t < x_max - 1e-14:
        table = derivative_cascade(state.g, N_max)
        h1 = table.h[1, :N_max + 1]
        cascade_ratio = max(cascade_ratio, float(np.max(np.abs(h1) / bound_row)))
        dt = min(state.dt, x_max - state.t)
        starts.append(state.t)
        coeffs.append(h1.copy())
        powers = dt ** np.arange(N_max + 1)
        g_new = np.empty(n_max, dtype=complex)
        for n in range(1, n_max + 1):
            avail = min(N_max, n_max - n)
            g_new[n - 1] = np.dot(table.h[n, :avail + 1], powers[:avail + 1])
        state.t = state.t + dt if state.t + dt < x_max - 1e-14 else x_max
        state.g = g_new
        state.tail += params.tail_bound(N_max) * (dt / params.dt) ** (N_max + 1)
        steps += 1
        if steps % reseed_every == 0 or state.t >= x_max:
            seg = TaylorPatchPotential(starts, state.t, coeffs)
            gen = seg.generator(z)
            E = _magnus.product(_magnus.march(gen, seed_t, state.t, seg.breakpoints(), ode_tol), len(z))
            samples = mobius(E, samples)
            seed_t = state.t
            full = _expand(samples, radius, n_keep)
            state.g = full[:n_max].copy()
            reseeds += 1
        env = max(env, _check_envelope(state.g, r, state.t))

    W = TaylorPatchPotential(starts, x_max, coeffs)
    x = np.unique(np.concatenate([
        np.linspace(s, e, points_per_step + 1)
        for s, e in zip(starts, list(starts[1:]) + [x_max])]))
    p, q = W.pq(x)
    a, b = W.ab(x)
    report = {
        "steps": steps,
        "dt": params.dt,
        "reseeds": reseeds,
        "tail_per_step": params.tail_bound(N_max),
        "tail_budget": state.tail,
        "envelope_ratio": env,
        "cascade_ratio": cascade_ratio,
        "max_a2_b2": float(np.max(a * a + b * b)),
        "F_at_i_residual": abs(Fi - 1j),
    }
    terminal = SeriesAtInfinity("w_chart", full, r)
    return Reconstruction(W, x, p, q, a, b, W.alpha(x), terminal, report)


TAILS = ("series", "freeze")


def forward_validate(W, F, lam_samples: Optional[Sequence[complex]] = None, tail: str = "series",
                     tol: float = 1e-11) -> float:
    """Max chordal distance between ``F`` and the F function of ``W`` on ``lam_samples``.

    Only the right half line is used, so the samples lie in the upper
    semidisk.  ``W`` is a :class:`Reconstruction` or a potential.  A
    reconstruction covers ``[0, x_max]`` only and needs a continuation:

    ``"series"``
        the terminal expansion ``m_+(x_max; z) = i + sum g_n (-1/z)^n``,
        accurate for ``|z| >= 2/r`` (the default samples satisfy this);
    ``"freeze"``
        the constant continuation by ``W(x_max)``, exact for constant input.

    Potentials with a constant right tail are used as they are.
    """
    if tail not in TAILS:
        raise InputError(f"tail must be one of {TAILS}")
    F = as_F(F)
    lam = np.asarray(DEFAULT_LAMBDA if lam_samples is None else lam_samples, dtype=complex)
    if np.any(np.abs(lam) >= 1) or np.any(lam.imag <= 0):
        raise InputError("samples must lie in the open upper semidisk")
    seed = None
    if isinstance(W, Reconstruction):
        pot = W.potential
        if tail == "series":
            seed = W.tail_seed()
        else:
            pot = pot.with_tails(right_const=(pot.end, pot(pot.end)))
    elif isinstance(W, DiracPotential):
        pot = W
        if pot.right_const is None and tail == "freeze":
            if not math.isfinite(pot.hi):
                raise InputError("freeze tail needs a potential on a finite interval")
            pot = FunctionPotential(pot, pot.lo, pot.hi, pot.gauge, pot.breakpoints(),
                                    right_const=(pot.hi, pot(pot.hi)))
    else:
        raise InputError("W must be a Reconstruction or a DiracPotential")
    got = F_from_potential(pot, lam, tol, tail_seed=seed)
    return float(np.max(chordal(got, F(lam))))
