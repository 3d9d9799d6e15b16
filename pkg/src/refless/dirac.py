"""Dirac potentials, transfer matrices, half-line m-functions and gauge actions.

Conventions: the Dirac equation ``J y' + W y = -z y`` is integrated as
``y' = J (W + z) y`` with ``J = [[0, -1], [1, 0]]``.  The half-line
m-functions are ``m_+ = y1/y2`` at 0 for the solution that is square
integrable on the right, and ``m_- = -y1/y2`` for the one on the left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import _magnus
from .errors import (DegenerateEigenbasis, DomainExceeded, GridTooCoarse, InputError,
                     IntegrationFailure, NoConvergence, NonDifferentiableAlpha,
                     NotEquivalent, NotUpperHalfPlane)
from .herglotz import chordal, rotation_matrix

J = np.array([[0.0, -1.0], [1.0, 0.0]])
S = np.diag([1.0, -1.0])
GAUGES = ("trace_zero", "offdiag_zero", "general")
L_CAP = 2.0 ** 14


def _sym(M):
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + np.swapaxes(M, -1, -2))


class DiracPotential:
    """Base class: a real symmetric 2x2 matrix function on an interval.

    Subclasses implement ``_core(x)`` on ``[lo, hi]``.  Optionally the
    potential is known to be constant beyond some point on either side
    (``right_const = (x0, W0)`` means ``W(x) = W0`` for ``x >= x0``); such
    tails extend the domain to infinity and give exact m-function seeds.
    """

    kind = "abstract"

    def __init__(self, lo: float, hi: float, gauge: str = "general",
                 breakpoints: Sequence[float] = (),
                 left_const: Optional[tuple] = None, right_const: Optional[tuple] = None):
        if gauge not in GAUGES:
            raise InputError(f"unknown gauge tag {gauge!r}")
        if not lo <= hi:
            raise InputError("empty domain")
        self.lo, self.hi = float(lo), float(hi)
        self.gauge = gauge
        self._breaks = tuple(sorted(float(b) for b in breakpoints))
        self.left_const = None if left_const is None else (float(left_const[0]), _sym(left_const[1]))
        self.right_const = None if right_const is None else (float(right_const[0]), _sym(right_const[1]))

    # domain ---------------------------------------------------------------
    @property
    def domain(self) -> tuple[float, float]:
        lo = -math.inf if self.left_const is not None else self.lo
        hi = math.inf if self.right_const is not None else self.hi
        return lo, hi

    def breakpoints(self) -> tuple:
        pts = list(self._breaks)
        if self.left_const is not None:
            pts.append(self.left_const[0])
        if self.right_const is not None:
            pts.append(self.right_const[0])
        return tuple(sorted(set(p for p in pts if math.isfinite(p))))

    def _core(self, x):
        raise NotImplementedError

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any(x < lo - 1e-13) or np.any(x > hi + 1e-13):
            raise DomainExceeded(f"potential defined on [{lo}, {hi}]")
        if x.ndim == 0:
            xv = float(x)
            if self.right_const is not None and xv >= self.right_const[0]:
                return self.right_const[1].copy()
            if self.left_const is not None and xv <= self.left_const[0]:
                return self.left_const[1].copy()
            return np.asarray(self._core(min(max(xv, self.lo), self.hi)), dtype=float)
        out = np.empty(x.shape + (2, 2))
        mask = np.ones(x.shape, bool)
        if self.right_const is not None:
            r = x >= self.right_const[0]
            out[r] = self.right_const[1]
            mask &= ~r
        if self.left_const is not None:
            l = x <= self.left_const[0]
            out[l & mask] = self.left_const[1]
            mask &= ~l
        if np.any(mask):
            out[mask] = self._core(np.clip(x[mask], self.lo, self.hi))
        return out

    # gauge --------------------------------------------------------------------
    def check_gauge(self, x=None, tol: float = 1e-10) -> bool:
        """True when sampled values satisfy the gauge tag (and are symmetric)."""
        if x is None:
            lo, hi = self.domain
            lo = max(lo, -5.0)
            hi = min(hi, 5.0)
            x = np.linspace(lo, hi, 41)
        V = self(np.asarray(x, dtype=float))
        ok = np.all(np.abs(V[..., 0, 1] - V[..., 1, 0]) <= tol)
        if self.gauge == "trace_zero":
            ok &= np.all(np.abs(V[..., 0, 0] + V[..., 1, 1]) <= tol)
        elif self.gauge == "offdiag_zero":
            ok &= np.all(np.abs(V[..., 0, 0]) <= tol)
        return bool(ok)

    def generator(self, z: np.ndarray) -> Callable:
        """``x -> J (W(x) + z)`` batched over ``z``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        zJ = z[:, None, None] * J

        def gen(x):
            return (J @ self(x))[None] + zJ

        return gen


class ConstantPotential(DiracPotential):
    kind = "constant"

    def __init__(self, matrix, gauge: Optional[str] = None):
        M = _sym(matrix)
        if gauge is None:
            gauge = "trace_zero" if abs(M[0, 0] + M[1, 1]) < 1e-15 else (
                "offdiag_zero" if M[0, 0] == 0 else "general")
        super().__init__(0.0, 0.0, gauge, left_const=(0.0, M), right_const=(0.0, M))
        self.matrix = M

    def _core(self, x):
        x = np.asarray(x)
        return np.broadcast_to(self.matrix, x.shape + (2, 2)).copy()

    def __repr__(self):
        return f"ConstantPotential({self.matrix.tolist()})"


class SampledPotential(DiracPotential):
    """Piecewise linear interpolation of matrices on a strictly increasing grid."""

    kind = "sampled"

    def __init__(self, grid, values, gauge: str = "general", **tails):
        grid = np.asarray(grid, dtype=float)
        values = _sym(values)
        if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
            raise InputError("grid must be strictly increasing with at least two nodes")
        if values.shape != (len(grid), 2, 2):
            raise InputError("values must have shape (len(grid), 2, 2)")
        super().__init__(grid[0], grid[-1], gauge, breakpoints=grid, **tails)
        self.grid, self.values = grid, values

    def _core(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            k = min(max(int(np.searchsorted(self.grid, x, side="right")) - 1, 0), len(self.grid) - 2)
            u = (x - self.grid[k]) / (self.grid[k + 1] - self.grid[k])
            return (1 - u) * self.values[k] + u * self.values[k + 1]
        flat = self.values.reshape(len(self.grid), 4)
        out = np.stack([np.interp(x, self.grid, flat[:, j]) for j in range(4)], -1)
        return out.reshape(x.shape + (2, 2))


class FunctionPotential(DiracPotential):
    """Closed-form potential ``fn(x) -> (..., 2, 2)``."""

    kind = "function"

    def __init__(self, fn: Callable, lo: float = -math.inf, hi: float = math.inf,
                 gauge: str = "general", breakpoints: Sequence[float] = (), **tails):
        super().__init__(lo, hi, gauge, breakpoints=breakpoints, **tails)
        self.fn = fn

    def _core(self, x):
        return np.asarray(self.fn(x), dtype=float)


def reflect(W: DiracPotential) -> DiracPotential:
    """``x -> S W(-x) S`` with ``S = diag(1, -1)``; swaps the half lines."""
    flip = lambda c: None if c is None else (-c[0], S @ c[1] @ S)
    if isinstance(W, ConstantPotential):
        return ConstantPotential(S @ W.matrix @ S, W.gauge)
    return FunctionPotential(lambda x: S @ W(-np.asarray(x)) @ S, -W.hi, -W.lo, W.gauge,
                             [-b for b in W._breaks],
                             left_const=flip(W.right_const), right_const=flip(W.left_const))


# ---------------------------------------------------------------------------
# transfer matrices and m-functions


def _batch(z):
    z = np.asarray(z, dtype=complex)
    return z, np.atleast_1d(z).ravel()


def transfer_matrix(W: DiracPotential, x, z, tol: float = 1e-10) -> np.ndarray:
    """Transfer matrix ``T(x; z)`` with ``J T' + W T = -z T``, ``T(0) = I``.

    ``x`` and ``z`` may be arrays; the result has shape
    ``x.shape + z.shape + (2, 2)``.
    """
    xs = np.asarray(x, dtype=float)
    z0, zb = _batch(z)
    lo, hi = W.domain
    if np.any(xs < lo) or np.any(xs > hi) or not lo <= 0 <= hi:
        raise DomainExceeded(f"x outside the potential's domain [{lo}, {hi}]")
    gen = W.generator(zb)
    flat = xs.ravel()
    out = np.empty((flat.size, zb.size, 2, 2), dtype=complex)
    for sign in (1.0, -1.0):
        idx = [k for k in np.argsort(sign * flat, kind="stable") if sign * flat[k] >= 0]
        Y = np.broadcast_to(np.eye(2, dtype=complex), (zb.size, 2, 2)).copy()
        pos = 0.0
        for k in idx:
            target = float(flat[k])
            if target != pos:
                for _, E in _magnus.march(gen, pos, target, W.breakpoints(), tol / 10):
                    Y = E @ Y
                pos = target
            out[k] = Y
    if not np.all(np.isfinite(out)):
        raise IntegrationFailure("transfer matrix overflowed")
    return out.reshape(xs.shape + z0.shape + (2, 2))


def eig_ratio(A: np.ndarray, sign: int) -> np.ndarray:
    """Ratio ``v1/v2`` of the eigenvector of traceless ``A`` with ``sign * Re mu > 0``."""
    a11, a12, a21, a22 = A[..., 0, 0], A[..., 0, 1], A[..., 1, 0], A[..., 1, 1]
    mu = np.sqrt(-(a11 * a22 - a12 * a21))
    scale = np.max(np.abs(A), axis=(-2, -1)) + 1e-300
    if np.any(np.abs(mu) < 1e-12 * scale) or np.any(np.abs(mu.real) < 1e-14 * scale):
        raise DegenerateEigenbasis("z at a branch point of the constant dispersion relation")
    mu = np.where(mu.real * sign > 0, mu, -mu)
    d1 = a11 - mu
    d2 = -a21
    use1 = np.abs(d1) >= np.abs(d2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(use1, -a12 / np.where(use1, d1, 1), (a22 - mu) / np.where(use1, 1, d2))


def _constant_eig(W0, z, sign):
    z = np.asarray(z, dtype=complex)
    A = J @ (_sym(W0) + z[..., None, None] * np.eye(2))
    return eig_ratio(A, sign)


def constant_m(W0, z):
    """Closed-form ``(m_+, m_-)`` for a constant potential ``W0``."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise NotUpperHalfPlane("constant_m needs Im z > 0")
    mp = _constant_eig(W0, z, -1)
    mm = -_constant_eig(W0, z, +1)
    if z.ndim == 0:
        return complex(mp), complex(mm)
    return mp, mm


@dataclass
class WeylInfo:
    """Diagnostics from :func:`m_plus`."""

    method: str
    lengths: list = field(default_factory=list)
    differences: list = field(default_factory=list)


def weyl_limit(gen_factory: Callable, breakpoints: Sequence[float], hi: float, z,
               tol: float, seed_at: Optional[tuple] = None, L_cap: float = L_CAP,
               info: Optional[WeylInfo] = None, start: Optional[float] = None,
               guard: Optional[Callable] = None):
    """Limit-point m-function for ``y' = A(x; z) y`` on ``[0, infinity)``.

    Either pulls back an explicit seed ``(x0, values)`` from ``x0``, or pulls
    back ``i`` from ``L`` with ``L`` doubling until successive values agree to
    ``tol`` in the chordal metric.  ``guard(L)`` may veto a cut-off (for
    example when the coefficients are no longer resolvable there).
    """
    z0, zb = _batch(z)
    gen = gen_factory(zb)
    itol = max(tol / 10, 1e-14)
    if seed_at is not None:
        x0, seed = seed_at
        steps = _magnus.march(gen, 0.0, x0, breakpoints, itol) if x0 > 0 else []
        m = _magnus.pullback(steps, np.broadcast_to(np.asarray(seed, dtype=complex), zb.shape).copy())
        if info is not None:
            info.lengths.append(x0)
        return m.reshape(z0.shape) if z0.ndim else complex(m[0])
    L = start if start is not None else 4.0 / float(np.min(zb.imag))
    L = min(L, hi)
    steps = _magnus.march(gen, 0.0, L, breakpoints, itol)
    prev = _magnus.pullback(steps, np.full(zb.shape, 1j))
    if info is not None:
        info.lengths.append(L)
    while True:
        if L >= hi:
            raise NoConvergence(f"Weyl limit not reached before the domain end x = {hi}")
        if L >= L_cap:
            raise NoConvergence(f"Weyl limit not reached by L = {L_cap}")
        L2 = min(2 * L, hi, L_cap)
        if guard is not None and not guard(L2):
            raise NoConvergence(f"Weyl limit not reached before x = {L2}, where the "
                                "coefficients are too ill-conditioned to resolve")
        steps = steps + _magnus.march(gen, L, L2, breakpoints, itol)
        cur = _magnus.pullback(steps, np.full(zb.shape, 1j))
        diff = float(np.max(chordal(cur, prev)))
        if info is not None:
            info.lengths.append(L2)
            info.differences.append(diff)
        L, prev = L2, cur
        if diff < tol:
            return cur.reshape(z0.shape) if z0.ndim else complex(cur[0])


def m_plus(W: DiracPotential, z, tol: float = 1e-10, method: str = "auto",
           tail_seed: Optional[Callable] = None, L_cap: float = L_CAP,
           info: Optional[WeylInfo] = None):
    """Right half-line m-function ``m_+(z)``.

    Parameters
    ----------
    W : DiracPotential
    z : complex or array
        Points of the upper half plane.
    method : {"auto", "doubling"}
        ``"auto"`` uses an exact constant-tail seed when ``W`` is constant
        beyond some point; ``"doubling"`` always pulls back ``i`` from a
        doubling cut-off ``L``.
    tail_seed : callable, optional
        ``z -> m(hi; z)``, the m-function of the unknown continuation of
        ``W`` beyond its domain.  Pulled back from ``W.hi``.
    info : WeylInfo, optional
        Filled with the cut-offs tried and the successive chordal changes.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise NotUpperHalfPlane("m_plus needs Im z > 0")
    if method not in ("auto", "doubling"):
        raise InputError(f"unknown method {method!r}")
    if W.domain[0] > 0:
        raise DomainExceeded("potential must be defined at 0")
    seed_at = None
    if method == "auto" and W.right_const is not None:
        x0, W0 = W.right_const
        seed_at = (max(x0, 0.0), constant_m(W0, np.atleast_1d(z).ravel())[0])
    elif tail_seed is not None:
        seed_at = (W.hi, tail_seed(np.atleast_1d(z).ravel()))
    if info is not None:
        info.method = "seed" if seed_at is not None else "doubling"
    return weyl_limit(W.generator, W.breakpoints(), W.domain[1], z, tol,
                      seed_at=seed_at, L_cap=L_cap, info=info)


def m_minus(W: DiracPotential, z, tol: float = 1e-10, method: str = "auto",
            L_cap: float = L_CAP, info: Optional[WeylInfo] = None):
    """Left half-line m-function, computed as ``m_+`` of the reflected potential."""
    return m_plus(reflect(W), z, tol, method, L_cap=L_cap, info=info)


# ---------------------------------------------------------------------------
# gauge group


@dataclass(frozen=True)
class GaugeElement:
    """Pair ``(alpha, t)``: an angle function and a shift.

    Use the constructors :meth:`constant`, :meth:`function` and
    :meth:`sampled`.  ``dalpha`` is the derivative; sampled angles get
    central differences (one-sided at the ends).
    """

    alpha: Callable
    dalpha: Optional[Callable]
    t: float = 0.0
    grid: Optional[np.ndarray] = None
    const: Optional[float] = None

    @classmethod
    def constant(cls, theta: float, t: float = 0.0) -> "GaugeElement":
        th = float(theta)
        return cls(lambda x: np.full(np.shape(x), th), lambda x: np.zeros(np.shape(x)), float(t), None, th)

    @classmethod
    def function(cls, alpha: Callable, dalpha: Optional[Callable] = None, t: float = 0.0) -> "GaugeElement":
        return cls(alpha, dalpha, float(t))

    @classmethod
    def sampled(cls, grid, values, t: float = 0.0) -> "GaugeElement":
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0) or values.shape != grid.shape:
            raise NonDifferentiableAlpha("sampled angle needs a strictly increasing grid of >= 2 nodes")
        d = np.gradient(values, grid, edge_order=1)
        return cls(lambda x: np.interp(x, grid, values), lambda x: np.interp(x, grid, d),
                   float(t), grid)

    def __mul__(self, other: "GaugeElement") -> "GaugeElement":
        """``(alpha, s)(beta, t) = (alpha + beta(s + .), s + t)``."""
        s = self.t
        a, b = self.alpha, other.alpha
        da, db = self.dalpha, other.dalpha
        dal = None if da is None or db is None else (lambda x: da(x) + db(s + np.asarray(x)))
        const = None if self.const is None or other.const is None else self.const + other.const
        return GaugeElement(lambda x: a(x) + b(s + np.asarray(x)), dal, s + other.t, None, const)

    @property
    def is_identity_at_zero(self) -> bool:
        return abs(float(self.alpha(0.0))) < 1e-14


def _rotate(alpha, V, dalpha):
    R = rotation_matrix(alpha)
    out = R @ V @ np.swapaxes(R, -1, -2)
    out[..., 0, 0] += dalpha
    out[..., 1, 1] += dalpha
    return out


def group_action(g: GaugeElement, W: DiracPotential) -> DiracPotential:
    """``((alpha, t) W)(x) = R_alpha(x) W(t + x) R_alpha(x)^T + alpha'(x)``."""
    if g.dalpha is None:
        raise NonDifferentiableAlpha("gauge element has no derivative")
    t = g.t
    lo, hi = W.lo - t, W.hi - t
    if g.const is not None:
        R = rotation_matrix(g.const)
        conj = lambda c: None if c is None else (c[0] - t, R @ c[1] @ R.T)
        if isinstance(W, ConstantPotential):
            return ConstantPotential(R @ W.matrix @ R.T, W.gauge)
        return FunctionPotential(lambda x: R @ W(t + np.asarray(x)) @ R.T, lo, hi, W.gauge,
                                 [b - t for b in W._breaks],
                                 left_const=conj(W.left_const), right_const=conj(W.right_const))
    gauge = "general"
    dlo, dhi = W.domain
    dlo, dhi = dlo - t, dhi - t
    if g.grid is not None:
        grid = g.grid[(g.grid >= dlo - 1e-13) & (g.grid <= dhi + 1e-13)]
        vals = _rotate(g.alpha(grid), W(np.clip(grid + t, W.domain[0], W.domain[1])), g.dalpha(grid))
        return SampledPotential(grid, vals, gauge)
    fn = lambda x: _rotate(g.alpha(x), W(t + np.asarray(x)), g.dalpha(x))
    return FunctionPotential(fn, dlo, dhi, gauge, [b - t for b in W.breakpoints()])


def alpha_action(g: GaugeElement, W: DiracPotential) -> DiracPotential:
    """``(alpha W)(x) = R_alpha(x) W(x) R_alpha(x)^T + alpha'(x)``; ``g.t`` must be 0."""
    if g.t != 0:
        raise InputError("alpha_action needs t = 0; use group_action")
    return group_action(g, W)


def shift(W: DiracPotential, t: float) -> DiracPotential:
    return group_action(GaugeElement.constant(0.0, t), W)


def _alpha_rhs(W):
    def f(x, a):
        V = W(x)
        c, s = math.cos(a[0]), math.sin(a[0])
        return [-(V[0, 0] * c * c + V[1, 1] * s * s - 2 * V[0, 1] * s * c)]
    return f


def normalize_offdiag(W: DiracPotential, interval: Optional[tuple] = None,
                      tol: float = 1e-12) -> tuple[DiracPotential, GaugeElement]:
    """Gauge ``W`` into the representative with ``W11 = 0``.

    Solves ``alpha' + W11 cos^2 + W22 sin^2 - 2 W12 sin cos = 0`` with
    ``alpha(0) = 0`` on ``interval`` (default: the domain of ``W``, which
    must then be finite).

    Returns
    -------
    W_new : DiracPotential
        ``alpha . W`` with gauge tag ``offdiag_zero``.
    alpha : GaugeElement
    """
    lo, hi = interval if interval is not None else W.domain
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo <= 0 <= hi:
        raise InputError("normalize_offdiag needs a finite interval containing 0")
    f = _alpha_rhs(W)
    pieces = []
    for a, b in ((0.0, hi), (0.0, lo)):
        if a == b:
            continue
        nodes = [p for p in W.breakpoints() if min(a, b) < p < max(a, b)]
        nodes = sorted(nodes, reverse=bool(b < a))
        nodes = [a] + nodes + [b]
        y = 0.0
        for u, v in zip(nodes[:-1], nodes[1:]):
            sol = solve_ivp(f, (u, v), [y], method="DOP853", rtol=tol, atol=tol * 1e-2,
                            dense_output=True)
            if not sol.success:
                raise IntegrationFailure(sol.message)
            pieces.append((min(u, v), max(u, v), sol.sol))
            y = float(sol.y[0, -1])
    pieces.sort(key=lambda p: p[0])
    starts = np.array([p[0] for p in pieces])

    def alpha(x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        k = np.clip(np.searchsorted(starts, flat, side="right") - 1, 0, len(pieces) - 1)
        out = np.empty(flat.shape)
        for j in np.unique(k):
            sel = k == j
            out[sel] = pieces[j][2](flat[sel])[0]
        return out.reshape(x.shape) if x.ndim else float(out[0])

    def dalpha(x):
        x = np.asarray(x, dtype=float)
        a = np.asarray(alpha(x))
        V = W(x)
        c, s = np.cos(a), np.sin(a)
        return -(V[..., 0, 0] * c * c + V[..., 1, 1] * s * s - 2 * V[..., 0, 1] * s * c)

    g = GaugeElement.function(alpha, dalpha)

    def fn(x):
        out = _rotate(alpha(x), W(x), dalpha(x))
        out[..., 0, 0] = 0.0
        return out

    brk = [p for p in W.breakpoints() if lo < p < hi]
    return FunctionPotential(fn, lo, hi, "offdiag_zero", brk), g


def gauge_between(W1: DiracPotential, W2: DiracPotential, grid, tol: float = 1e-7,
                  ode_tol: float = 1e-12) -> GaugeElement:
    """Angle ``alpha`` with ``W2 = alpha . W1`` and ``alpha(0) = 0``.

    Uses ``U(x) = T2(x) T1(x)^{-1}`` at ``z = 0``, which must be a rotation.

    Raises
    ------
    NotEquivalent
        If some ``U(x)`` is farther than ``tol`` from SO(2).
    GridTooCoarse
        If consecutive angles jump by ``pi/2`` or more.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0) or not np.any(grid == 0):
        raise InputError("grid must be strictly increasing and contain 0")
    T1 = transfer_matrix(W1, grid, 0.0, ode_tol).real
    T2 = transfer_matrix(W2, grid, 0.0, ode_tol).real
    adj = np.empty_like(T1)
    adj[..., 0, 0], adj[..., 1, 1] = T1[..., 1, 1], T1[..., 0, 0]
    adj[..., 0, 1], adj[..., 1, 0] = -T1[..., 0, 1], -T1[..., 1, 0]
    U = T2 @ adj
    dev = np.max(np.abs(np.swapaxes(U, -1, -2) @ U - np.eye(2)), axis=(-2, -1))
    if np.any(dev > tol) or np.any(np.linalg.det(U) <= 0):
        raise NotEquivalent(f"transfer matrices differ by a non-rotation (deviation {dev.max():.3g})")
    raw = np.arctan2(U[:, 1, 0], U[:, 0, 0])
    i0 = int(np.flatnonzero(grid == 0)[0])
    alpha = np.empty_like(raw)
    alpha[i0] = 0.0
    for rng, step in ((range(i0 + 1, len(grid)), -1), (range(i0 - 1, -1, -1), 1)):
        for k in rng:
            prev = alpha[k + step]
            d = (raw[k] - prev + math.pi) % (2 * math.pi) - math.pi
            if abs(d) >= math.pi / 2:
                raise GridTooCoarse(f"angle jump {d:.3g} between grid nodes")
            alpha[k] = prev + d
    return GaugeElement.sampled(grid, alpha)


def gap_parameters(c: float, d: float) -> tuple[float, float]:
    """``(a, g)`` for :func:`shift_scale` moving the gap ``(c, d)`` to ``(-1, 1)``."""
    if not d > c:
        raise InputError("need c < d")
    return 0.5 * (c + d), 2.0 / (d - c)


def shift_scale(W: DiracPotential, a: float, g: float) -> DiracPotential:
    """``x -> g (W(g x) + a)``, so that ``m(zeta; result) = m(zeta/g + a; W)``."""
    if not g > 0:
        raise InputError("g must be positive")
    if a == 0 and g == 1:
        return W
    if isinstance(W, ConstantPotential):
        return ConstantPotential(g * (W.matrix + a * np.eye(2)))
    sc = lambda c: None if c is None else (c[0] / g, g * (c[1] + a * np.eye(2)))
    lo, hi = W.lo / g, W.hi / g
    return FunctionPotential(lambda x: g * (W(g * np.asarray(x)) + a * np.eye(2)), lo, hi,
                             "general", [b / g for b in W._breaks],
                             left_const=sc(W.left_const), right_const=sc(W.right_const))
