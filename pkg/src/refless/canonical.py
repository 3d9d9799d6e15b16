"""Canonical systems ``J u' = -z H u`` and their relation to Dirac potentials."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import _magnus
from .dirac import (J, S, ConstantPotential, DiracPotential, SampledPotential, eig_ratio,
                    transfer_matrix, weyl_limit)
from .errors import DegenerateSystem, InputError, NotNormalized, NotUpperHalfPlane, SingularH
from .herglotz import INF, HerglotzRep, MoebiusMap, mobius

NORMALIZATIONS = ("det_one", "trace_one", None)


def _sym(M):
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def _det(M):
    return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]


def det_defect(M) -> np.ndarray:
    """``|det M - 1|`` less the rounding error of forming the determinant."""
    noise = 8 * np.finfo(float).eps * np.max(np.abs(M), axis=(-2, -1)) ** 2
    return np.maximum(np.abs(_det(M) - 1) - noise, 0.0)


class CanonicalSystem:
    """A real symmetric, positive semidefinite ``H(x)``.

    Build instances with :meth:`constant`, :meth:`sampled`, :meth:`function`
    or :meth:`degenerate`.  Sampled systems interpolate linearly; their
    derivative is carried exactly when supplied and otherwise formed by
    central differences on the grid.
    """

    def __init__(self, kind: str, lo: float, hi: float, H: Callable, dH: Optional[Callable],
                 normalization: Optional[str], grid=None, values=None, derivatives=None,
                 angle: Optional[float] = None, matrix=None):
        if normalization not in NORMALIZATIONS:
            raise InputError(f"unknown normalization {normalization!r}")
        self.kind, self.lo, self.hi = kind, float(lo), float(hi)
        self._H, self._dH = H, dH
        self.normalization = normalization
        self.grid, self.values, self.derivatives = grid, values, derivatives
        self.angle = angle
        self.matrix = matrix

    # constructors -------------------------------------------------------------
    @classmethod
    def constant(cls, M, normalization: Optional[str] = None) -> "CanonicalSystem":
        M = _sym(M)
        ev = np.linalg.eigvalsh(M)
        if ev[0] < -1e-12:
            raise InputError("H must be positive semidefinite")
        if _det(M) <= 1e-14:
            raise InputError("a singular constant H is a degenerate system; use degenerate()")
        H = lambda x: np.broadcast_to(M, np.shape(x) + (2, 2)).copy()
        dH = lambda x: np.zeros(np.shape(x) + (2, 2))
        return cls("constant", -math.inf, math.inf, H, dH, normalization, matrix=M)

    @classmethod
    def sampled(cls, grid, values, derivatives=None, normalization: Optional[str] = None,
                tol: float = 1e-9) -> "CanonicalSystem":
        grid = np.asarray(grid, dtype=float)
        values = _sym(values)
        if grid.ndim != 1 or len(grid) < 2 or np.any(np.diff(grid) <= 0):
            raise InputError("grid must be strictly increasing with at least two nodes")
        if values.shape != (len(grid), 2, 2):
            raise InputError("H_values must have shape (len(grid), 2, 2)")
        if np.any(np.linalg.eigvalsh(values)[:, 0] < -tol):
            raise InputError("H must be positive semidefinite")
        if normalization == "det_one" and np.max(det_defect(values)) > tol:
            raise NotNormalized("det_one system with det H != 1")
        if normalization == "trace_one" and np.max(np.abs(np.trace(values, axis1=1, axis2=2) - 1)) > tol:
            raise NotNormalized("trace_one system with tr H != 1")
        if derivatives is not None:
            derivatives = _sym(derivatives)
            if derivatives.shape != values.shape:
                raise InputError("derivative samples must match H_values")
        flatv = values.reshape(len(grid), 4)

        def H(x):
            x = np.asarray(x, dtype=float)
            out = np.stack([np.interp(x, grid, flatv[:, j]) for j in range(4)], -1)
            return out.reshape(x.shape + (2, 2))

        dH = None
        if derivatives is not None:
            flatd = derivatives.reshape(len(grid), 4)

            def dH(x):
                x = np.asarray(x, dtype=float)
                out = np.stack([np.interp(x, grid, flatd[:, j]) for j in range(4)], -1)
                return out.reshape(x.shape + (2, 2))

        return cls("sampled", grid[0], grid[-1], H, dH, normalization, grid, values, derivatives)

    @classmethod
    def function(cls, H: Callable, dH: Optional[Callable] = None, lo: float = -math.inf,
                 hi: float = math.inf, normalization: Optional[str] = None) -> "CanonicalSystem":
        return cls("function", lo, hi, H, dH, normalization)

    @classmethod
    def degenerate(cls, alpha: float) -> "CanonicalSystem":
        """``H = P_alpha``, the projection onto ``(cos alpha, sin alpha)``."""
        a = float(alpha) % math.pi
        e = np.array([math.cos(a), math.sin(a)])
        P = np.outer(e, e)
        H = lambda x: np.broadcast_to(P, np.shape(x) + (2, 2)).copy()
        dH = lambda x: np.zeros(np.shape(x) + (2, 2))
        return cls("degenerate", -math.inf, math.inf, H, dH, None, angle=a, matrix=P)

    # evaluation ---------------------------------------------------------------
    @property
    def is_degenerate(self) -> bool:
        return self.angle is not None

    def breakpoints(self) -> tuple:
        return tuple(self.grid) if self.grid is not None else ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.lo - 1e-13) or np.any(x > self.hi + 1e-13):
            raise InputError(f"H defined on [{self.lo}, {self.hi}]")
        return self._H(x)

    def derivative(self, x, rule: str = "auto"):
        """``H'(x)``.

        ``rule="exact"`` needs carried derivative samples or a closed form;
        ``"central"`` uses central differences on the grid (one-sided at the
        ends); ``"auto"`` prefers exact.
        """
        x = np.asarray(x, dtype=float)
        if rule not in ("auto", "exact", "central"):
            raise InputError(f"unknown derivative rule {rule!r}")
        if rule in ("auto", "exact") and self._dH is not None:
            return self._dH(x)
        if rule == "exact":
            raise InputError("no exact derivative available")
        if self.grid is None:
            h = 1e-5
            return (self._H(x + h) - self._H(x - h)) / (2 * h)
        if getattr(self, "_central", None) is None:
            self._central = np.gradient(self.values, self.grid, axis=0, edge_order=1).reshape(len(self.grid), 4)
        flat = self._central
        out = np.stack([np.interp(x, self.grid, flat[:, j]) for j in range(4)], -1)
        return out.reshape(x.shape + (2, 2))

    def generator(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))

        def gen(x):
            return z[:, None, None] * (J @ self(x))[None]

        return gen

    def reflected(self) -> "CanonicalSystem":
        """``x -> S H(-x) S``; swaps the half lines."""
        if self.is_degenerate:
            return CanonicalSystem.degenerate(-self.angle)
        if self.kind == "constant":
            return CanonicalSystem.constant(S @ self.matrix @ S, self.normalization)
        if self.kind == "sampled":
            g = -self.grid[::-1]
            v = S @ self.values[::-1] @ S
            d = None if self.derivatives is None else -(S @ self.derivatives[::-1] @ S)
            return CanonicalSystem.sampled(g, v, d, self.normalization)
        dH = None if self._dH is None else (lambda x: -(S @ self._dH(-np.asarray(x)) @ S))
        return CanonicalSystem.function(lambda x: S @ self._H(-np.asarray(x)) @ S, dH,
                                        -self.hi, -self.lo, self.normalization)


def _frame(H: CanonicalSystem, x):
    """Triangular frame of ``H/sqrt(det H)`` and the traceless matrix ``T' T^{-1}``."""
    Hx = np.asarray(H(x), dtype=float)
    dHx = np.asarray(H.derivative(x), dtype=float)
    if H.normalization == "det_one":
        # recomputing det H would cost eps * cond(H)
        r, Ht, dHt = 1.0, Hx, dHx
    else:
        r = math.sqrt(_det(Hx))
        adj = np.array([[Hx[1, 1], -Hx[0, 1]], [-Hx[1, 0], Hx[0, 0]]])
        dr = 0.5 * float(np.trace(adj @ dHx)) / r
        Ht = Hx / r
        dHt = (dHx - Hx * dr / r) / r
    s = math.sqrt(Ht[0, 0])
    g = dHt[0, 0] / (2 * Ht[0, 0])
    B = np.array([[g, dHt[0, 1] - 2 * g * Ht[0, 1]], [0.0, -g]])
    return s, Ht[0, 1] / s, r, B


def m_plus(H: CanonicalSystem, z, tol: float = 1e-8, tail_seed: Optional[Callable] = None,
           method: str = "auto"):
    """Right half-line m-function of a canonical system.

    With ``method="frame"`` (the default whenever ``det H > 0``) the system
    is rewritten for ``y = T u``, ``T`` the upper triangular factor of
    ``H/sqrt(det H)``, which gives ``y' = (T' T^{-1} + z sqrt(det H) J) y``.
    Its coefficients stay bounded when ``H`` grows exponentially, unlike the
    direct form ``u' = z J H u`` (``method="direct"``).

    Both forms lose about ``eps * cond H(x)`` in their coefficients (the
    frame form only ``eps * sqrt(cond H(x))`` for ``det_one`` systems), so the
    cut-off is not extended where that exceeds ``tol``; this raises
    :class:`NoConvergence` instead of marching through rounding noise.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise NotUpperHalfPlane("m_plus needs Im z > 0")
    if method not in ("auto", "frame", "direct"):
        raise InputError(f"unknown method {method!r}")
    if H.is_degenerate:
        c, s = math.cos(H.angle), math.sin(H.angle)
        val = INF if abs(c) < 1e-300 else complex(-s / c)
        return np.full(z.shape, val) if z.ndim else val
    if H.kind == "constant":
        A = z[..., None, None] * (J @ H.matrix)
        out = eig_ratio(A, -1)
        return complex(out) if z.ndim == 0 else out
    seed = None
    if tail_seed is not None:
        seed = (H.hi, tail_seed(np.atleast_1d(z).ravel()))
    if method == "auto":
        method = "direct" if _det(np.asarray(H(0.0))) <= 1e-12 else "frame"
    def guard(L):
        ev = np.linalg.eigvalsh(np.asarray(H(L), dtype=float))
        cond = ev[-1] / max(ev[0], 1e-300)
        p = 0.5 if method == "frame" and H.normalization == "det_one" else 1.0
        return np.finfo(float).eps * cond ** p < tol

    if method == "direct":
        return weyl_limit(H.generator, H.breakpoints(), H.hi, z, tol, seed_at=seed, guard=guard)
    s0, c0, _, _ = _frame(H, 0.0)
    if seed is not None:
        s1, c1, _, _ = _frame(H, H.hi)
        seed = (seed[0], mobius(np.array([[s1, c1], [0.0, 1 / s1]]), seed[1]))

    def factory(zb):
        zb = np.atleast_1d(zb)

        def gen(x):
            _, _, r, B = _frame(H, float(x))
            return B[None] + (zb * r)[:, None, None] * J

        return gen

    my = weyl_limit(factory, H.breakpoints(), H.hi, z, tol, seed_at=seed, guard=guard)
    Ti = np.array([[1 / s0, -c0], [0.0, s0]])
    return mobius(Ti, my)


def m_minus(H: CanonicalSystem, z, tol: float = 1e-8, method: str = "auto"):
    """Left half-line m-function (``m_+`` of the reflected system)."""
    return m_plus(H.reflected(), z, tol, method=method)


# ---------------------------------------------------------------------------


def _expm_constant(W0, x):
    A = J @ np.asarray(W0, dtype=float)
    x = np.asarray(x, dtype=float)
    return _magnus.sl2_exp((x[..., None, None] * A).astype(complex)).real


def dirac_to_canonical(W: DiracPotential, grid=None, tol: float = 1e-12) -> CanonicalSystem:
    """``H = T^T T`` with ``T`` the ``z = 0`` transfer matrix of ``W``.

    The derivative ``H' = T^T (J W - W J) T`` is carried exactly.  For a
    constant potential and ``grid=None`` a closed-form system is returned.
    """
    if grid is None:
        if not isinstance(W, ConstantPotential):
            raise InputError("a grid is required for non-constant potentials")
        W0 = W.matrix
        C = J @ W0 - W0 @ J

        def H(x):
            T = _expm_constant(W0, x)
            return np.swapaxes(T, -1, -2) @ T

        def dH(x):
            T = _expm_constant(W0, x)
            return np.swapaxes(T, -1, -2) @ C @ T

        return CanonicalSystem.function(H, dH, normalization="det_one")
    grid = np.asarray(grid, dtype=float)
    T = transfer_matrix(W, grid, 0.0, tol).real
    Tt = np.swapaxes(T, -1, -2)
    V = W(grid)
    C = J @ V - V @ J
    return CanonicalSystem.sampled(grid, Tt @ T, Tt @ C @ T, "det_one")


def triangular_factor(Hv):
    """Upper triangular ``T`` with ``T^T T = H`` and ``det T = 1`` (needs ``det H = 1``)."""
    s = np.sqrt(Hv[..., 0, 0])
    T = np.zeros(Hv.shape)
    T[..., 0, 0] = s
    T[..., 0, 1] = Hv[..., 0, 1] / s
    T[..., 1, 1] = 1 / s
    return T


def canonical_to_dirac(H: CanonicalSystem, derivative: str = "exact", grid=None,
                       tol: float = 1e-9) -> SampledPotential:
    """Dirac potential with ``W11 = 0`` whose canonical system is ``H``.

    Factor ``H = T^T T`` with ``T`` upper triangular and set
    ``W = -J T' T^{-1}``.  Evaluated on ``grid`` (default: the grid of ``H``).

    Raises
    ------
    NotNormalized
        If ``det H != 1`` or ``H(0) != I``.
    SingularH
        If an eigenvalue of ``H`` is at most ``tol``.
    """
    if grid is None:
        grid = H.grid
    if grid is None:
        raise InputError("a grid is required")
    grid = np.asarray(grid, dtype=float)
    if H.is_degenerate:
        raise SingularH("degenerate system has no Dirac potential")
    Hv = H(grid)
    if np.any(np.linalg.eigvalsh(Hv)[:, 0] <= tol):
        raise SingularH("H has an eigenvalue <= tol")
    if np.max(det_defect(Hv)) > tol:
        raise NotNormalized("det H != 1")
    if not np.any(grid == 0) or np.max(np.abs(H(0.0) - np.eye(2))) > tol:
        raise NotNormalized("H(0) must be the identity")
    dHv = H.derivative(grid, derivative)
    s = np.sqrt(Hv[:, 0, 0])
    ds = dHv[:, 0, 0] / (2 * s)
    c = Hv[:, 0, 1] / s
    dc = (dHv[:, 0, 1] * s - Hv[:, 0, 1] * ds) / (s * s)
    q = -ds / s
    W = np.zeros(Hv.shape)
    W[:, 0, 1] = W[:, 1, 0] = q
    W[:, 1, 1] = ds * c - dc * s
    return SampledPotential(grid, W, "offdiag_zero")


def psl2_action(A: MoebiusMap, H: CanonicalSystem) -> CanonicalSystem:
    """``(A H)(x) = A^{-T} H(x) A^{-1}``; then ``+-m_+-(A H) = A(+-m_+-(H))``."""
    M = A.matrix
    Ai = np.linalg.inv(M)
    AiT = Ai.T
    if H.is_degenerate:
        v = AiT @ np.array([math.cos(H.angle), math.sin(H.angle)])
        return CanonicalSystem.degenerate(math.atan2(v[1], v[0]))
    norm = H.normalization if H.normalization == "det_one" else None
    if H.kind == "constant":
        return CanonicalSystem.constant(AiT @ H.matrix @ Ai, norm)
    if H.kind == "sampled":
        d = None if H.derivatives is None else AiT @ H.derivatives @ Ai
        return CanonicalSystem.sampled(H.grid, AiT @ H.values @ Ai, d, norm)
    dH = None if H._dH is None else (lambda x: AiT @ H._dH(x) @ Ai)
    return CanonicalSystem.function(lambda x: AiT @ H._H(x) @ Ai, dH, H.lo, H.hi, norm)


def det_normalize(H: CanonicalSystem, tol: float = 1e-12) -> CanonicalSystem:
    """Reparametrize to ``det H = 1``: ``H~(x~) = H(x)/sqrt(det H(x))``, ``dx~ = sqrt(det H) dx``.

    ``x~`` is the trapezoid-rule integral of ``sqrt(det H)`` from the grid
    point 0 (or the first node when 0 is absent).
    """
    if H.kind != "sampled":
        raise InputError("det_normalize works on sampled systems")
    d = _det(H.values)
    if np.any(d < tol):
        raise DegenerateSystem("det H vanishes on the grid")
    r = np.sqrt(d)
    xt = np.concatenate([[0.0], np.cumsum(0.5 * (r[1:] + r[:-1]) * np.diff(H.grid))])
    zero = np.flatnonzero(H.grid == 0)
    if zero.size:
        xt = xt - xt[zero[0]]
    Ht = H.values / r[:, None, None]
    dHt = None
    if H.derivatives is not None:
        adj = np.empty_like(H.values)
        adj[:, 0, 0], adj[:, 1, 1] = H.values[:, 1, 1], H.values[:, 0, 0]
        adj[:, 0, 1] = adj[:, 1, 0] = -H.values[:, 0, 1]
        dd = np.einsum("kij,kji->k", adj, H.derivatives)
        dHx = H.derivatives / r[:, None, None] - H.values * (dd / (2 * d * r))[:, None, None]
        dHt = dHx / r[:, None, None]
    return CanonicalSystem.sampled(xt, Ht, dHt, "det_one")


def sqrtm_spd(M):
    """Symmetric square root ``(M + sqrt(det M) I)/sqrt(tr M + 2 sqrt(det M))``."""
    sd = np.sqrt(_det(M))
    t = np.sqrt(M[..., 0, 0] + M[..., 1, 1] + 2 * sd)
    out = M.copy()
    out[..., 0, 0] += sd
    out[..., 1, 1] += sd
    return out / t[..., None, None]


@dataclass(frozen=True)
class KMatrix:
    """``K = H^{-1/2} H' H^{-1/2}`` with two evaluations of its norm."""

    K: np.ndarray
    norm: float
    det_norm: float
    trace: float

    def __iter__(self):
        return iter((self.K, self.norm))


def k_matrix(H: CanonicalSystem, x: float, derivative: str = "auto", tol: float = 1e-12) -> KMatrix:
    """``K(x)``; ``norm`` is the largest singular value, ``det_norm = |det H'|^{1/2}``."""
    Hx = np.asarray(H(float(x)), dtype=float)
    if _det(Hx) <= tol:
        raise SingularH("det H(x) <= tol")
    dHx = np.asarray(H.derivative(float(x), derivative), dtype=float)
    R = sqrtm_spd(Hx)
    Ri = np.linalg.inv(R)
    K = Ri @ dHx @ Ri
    K = 0.5 * (K + K.T)
    norm = float(np.max(np.abs(np.linalg.eigvalsh(K))))
    return KMatrix(K, norm, float(math.sqrt(abs(_det(dHx)))), float(np.trace(K)))


def normalize_to_dirac_class(F, tol: float = 0.0):
    """The unique ``g`` in the dilation/translation group with ``(g F)(i) = i``.

    ``g m = c^2 m + a_g`` with ``c^2 = 1/b0`` and ``a_g = -a0/b0`` where
    ``F(i) = a0 + i b0``.

    Returns
    -------
    g : MoebiusMap
    F_new : HerglotzRep or complex
        The transformed representation, or the transformed value ``i``.
        An analytic ``FFunction`` is treated as its representation; any other
        ``FFunction`` as its value at ``i``.
    """
    if hasattr(F, "at_i"):
        F = F.rep if F.is_analytic else F.at_i()
    val = complex(F.shift, F.mass) if isinstance(F, HerglotzRep) else complex(F)
    a0, b0 = val.real, val.imag
    if b0 <= tol:
        raise DegenerateSystem("F(i) is real: the system is degenerate")
    c = 1 / math.sqrt(b0)
    ag = -a0 / b0
    g = MoebiusMap(c, ag / c, 0.0, 1 / c)
    if isinstance(F, HerglotzRep):
        c2 = 1 / b0
        return g, HerglotzRep(c2 * F.shift + ag, tuple((t, c2 * w) for t, w in F.atoms))
    return g, complex(g(val))
