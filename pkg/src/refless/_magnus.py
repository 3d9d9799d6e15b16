"""Adaptive fourth-order Magnus integrator for traceless 2x2 linear systems.

Solves ``Y' = A(x) Y`` where ``A(x)`` is traceless, batched over a leading
axis (one slice per spectral parameter).  Each step uses the two-point
Gauss-Legendre Magnus expansion and the closed-form exponential of a
traceless 2x2 matrix, so propagators have determinant one to rounding and
constant generators are integrated exactly.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import IntegrationFailure

_C1 = 0.5 - math.sqrt(3) / 6
_C2 = 0.5 + math.sqrt(3) / 6
_K = math.sqrt(3) / 12
# cap on |s| in exp(Omega) so single step propagators stay well conditioned
_MAX_EXPONENT = 8.0
_MAX_STEPS = 20_000


def sl2_exp(Om: np.ndarray) -> np.ndarray:
    """``exp`` of traceless 2x2 matrices: ``cosh(s) I + sinh(s)/s Om``, ``s^2 = -det Om``."""
    tr = 0.5 * (Om[..., 0, 0] + Om[..., 1, 1])
    Om = Om.copy()
    Om[..., 0, 0] -= tr
    Om[..., 1, 1] -= tr
    s2 = -(Om[..., 0, 0] * Om[..., 1, 1] - Om[..., 0, 1] * Om[..., 1, 0])
    s = np.sqrt(s2)
    small = np.abs(s) < 1e-4
    safe = np.where(small, 1.0, s)
    sinhc = np.where(small, 1 + s2 / 6 + s2 * s2 / 120, np.sinh(safe) / safe)
    ch = np.cosh(s)
    out = sinhc[..., None, None] * Om
    out[..., 0, 0] += ch
    out[..., 1, 1] += ch
    return out


def exponent_size(Om: np.ndarray) -> float:
    s2 = -(Om[..., 0, 0] * Om[..., 1, 1] - Om[..., 0, 1] * Om[..., 1, 0])
    return float(np.max(np.abs(np.sqrt(s2).real), initial=0.0))


def magnus_omega(gen: Callable, x: float, h: float) -> np.ndarray:
    A1 = gen(x + _C1 * h)
    A2 = gen(x + _C2 * h)
    comm = A2 @ A1 - A1 @ A2
    return 0.5 * h * (A1 + A2) + _K * h * h * comm


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    num = np.max(np.abs(a - b), axis=(-2, -1))
    den = np.maximum(np.max(np.abs(b), axis=(-2, -1)), 1.0)
    return float(np.max(num / den))


def _segment(gen, a: float, b: float, tol: float, h: float, steps: list) -> float:
    """Adaptive march over ``[a, b]`` (either orientation); returns the last step size."""
    direction = 1.0 if b >= a else -1.0
    length = abs(b - a)
    if length == 0:
        return h
    x = a
    h = min(abs(h), length)
    count = 0
    while True:
        remaining = abs(b - x)
        if remaining <= 1e-15 * max(1.0, abs(b)):
            break
        hh = min(h, remaining)
        last = hh == remaining
        Om = magnus_omega(gen, x, direction * hh)
        if exponent_size(Om) > _MAX_EXPONENT:
            h = hh / 2
            continue
        full = sl2_exp(Om)
        E1 = sl2_exp(magnus_omega(gen, x, direction * hh / 2))
        E2 = sl2_exp(magnus_omega(gen, x + direction * hh / 2, direction * hh / 2))
        half = E2 @ E1
        err = _rel(half, full)
        if err <= tol or hh < 1e-12 * max(1.0, length):
            if err > tol and hh < 1e-12 * max(1.0, length):
                raise IntegrationFailure(f"step size underflow near x = {x}")
            x = b if last else x + direction * hh
            steps.append((x, half))
            fac = 4.0 if err == 0 else min(4.0, max(0.2, 0.9 * (tol / err) ** 0.2))
            h = hh * fac
        else:
            h = hh * max(0.1, 0.9 * (tol / err) ** 0.2)
        count += 1
        if count > _MAX_STEPS:
            raise IntegrationFailure("too many steps")
    return h


def march(gen: Callable, a: float, b: float, breakpoints: Sequence[float], tol: float,
          h0: float | None = None) -> list:
    """Step propagators from ``a`` to ``b``, splitting at breakpoints.

    Returns a list of ``(x_end, E)`` where ``E`` maps the solution at the
    previous node to the one at ``x_end``.
    """
    lo, hi = min(a, b), max(a, b)
    inner = sorted(p for p in set(breakpoints) if lo < p < hi)
    nodes = [a] + (inner if b >= a else inner[::-1]) + [b]
    steps: list = []
    h = h0 if h0 is not None else max(abs(b - a) / 8, 1e-3)
    for u, v in zip(nodes[:-1], nodes[1:]):
        h = _segment(gen, u, v, tol, min(h, abs(v - u)) if abs(v - u) > 0 else h, steps)
        h = max(h, 1e-3)
    return steps


def product(steps: list, nz: int) -> np.ndarray:
    Y = np.broadcast_to(np.eye(2, dtype=complex), (nz, 2, 2)).copy()
    for _, E in steps:
        Y = E @ Y
    return Y


def pullback(steps: list, m: np.ndarray) -> np.ndarray:
    """Carry ratios ``y1/y2`` from the end of ``steps`` back to their start."""
    from .herglotz import mobius

    for _, E in reversed(steps):
        adj = np.empty_like(E)
        adj[..., 0, 0] = E[..., 1, 1]
        adj[..., 1, 1] = E[..., 0, 0]
        adj[..., 0, 1] = -E[..., 0, 1]
        adj[..., 1, 0] = -E[..., 1, 0]
        m = mobius(adj, m)
    return m
