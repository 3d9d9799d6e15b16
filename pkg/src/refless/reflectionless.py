"""F functions of reflectionless systems and the pointwise bounds they imply.

An F function packages both half-line m-functions: ``F(lam) = M(phi(lam))``
where ``M = m_+`` on the upper half plane and ``M(z) = -conj(m_-(conj z))``
on the lower one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence, Union

import numpy as np

from . import canonical as _can
from . import dirac as _dirac
from .dirac import ConstantPotential, DiracPotential
from .errors import (BadWeights, DomainExceeded, ExtrapolationUnstable, InputError, NoConvergence,
                     NotUpperHalfPlane, SlitInput)
from .herglotz import HerglotzRep, on_slit, phi, phi_inverse, taylor_coefficients

DEFAULT_Y = tuple(10.0 ** -k for k in range(1, 6))
I_PROBE_Y = (1e3, 2e3, 4e3, 8e3)


def richardson_limit(y, values, deg: int = 2) -> complex:
    """Value at ``y = 0`` of a degree-``deg`` polynomial fit in relative residuals.

    Residuals are scaled by ``1/y**2`` so the smallest ``y`` dominate; with
    geometric ``y`` this behaves like Richardson extrapolation.
    """
    y = np.asarray(y, dtype=float)
    v = np.asarray(values, dtype=complex)
    w = 1 / y ** 2
    cr = np.polyfit(y, v.real, deg, w=w)
    ci = np.polyfit(y, v.imag, deg, w=w)
    return complex(cr[-1], ci[-1])


class FFunction:
    """An F function, either analytic (a Herglotz representation) or numeric.

    The numeric path evaluates m-functions of a potential:
    ``F(lam) = m_+(phi(lam))`` for ``|lam| < 1`` and
    ``F(lam) = -conj(m_-(conj phi(lam)))`` for ``|lam| > 1``.

    Parameters
    ----------
    rep : HerglotzRep, optional
    potential : DiracPotential, optional
    tail_seed : callable, optional
        Right tail seed for potentials known only on a finite interval,
        see :func:`refless.dirac.m_plus`.
    tol : float
        Tolerance passed to the m-function solvers.
    """

    def __init__(self, rep: Optional[HerglotzRep] = None, potential: Optional[DiracPotential] = None,
                 tail_seed: Optional[Callable] = None, tol: float = 1e-10):
        if (rep is None) == (potential is None):
            raise InputError("give exactly one of rep, potential")
        self.rep, self.potential = rep, potential
        self.tail_seed, self.tol = tail_seed, tol

    @classmethod
    def analytic(cls, rep: HerglotzRep) -> "FFunction":
        return cls(rep=rep)

    @classmethod
    def from_potential(cls, W: DiracPotential, tail_seed: Optional[Callable] = None,
                       tol: float = 1e-10) -> "FFunction":
        return cls(potential=W, tail_seed=tail_seed, tol=tol)

    @property
    def is_analytic(self) -> bool:
        return self.rep is not None

    def __call__(self, lam):
        if self.rep is not None:
            return self.rep(lam)
        return F_from_potential(self.potential, lam, self.tol, tail_seed=self.tail_seed)

    def m_plus(self, z):
        if self.rep is not None:
            return self.rep(phi_inverse(z, "semidisk"))
        return _dirac.m_plus(self.potential, z, self.tol, tail_seed=self.tail_seed)

    def m_minus(self, z):
        if self.rep is not None:
            return -np.conj(self.rep(phi_inverse(np.conj(z), "exterior")))
        return _dirac.m_minus(self.potential, z, self.tol)

    def M(self, z):
        """``m_+(z)`` above the real axis and ``-conj(m_-(conj z))`` below."""
        z = np.asarray(z, dtype=complex)
        if self.rep is not None:
            br = np.where(z.imag >= 0, 0, 1)
            lam = np.where(br == 0, phi_inverse(z, "semidisk"), phi_inverse(z, "exterior"))
            out = self.rep(lam)
            return complex(out) if z.ndim == 0 else out
        flat = np.atleast_1d(z).ravel()
        out = np.empty(flat.shape, dtype=complex)
        up = flat.imag > 0
        if np.any(up):
            out[up] = np.atleast_1d(self.m_plus(flat[up]))
        if np.any(~up):
            if np.any(flat[~up].imag == 0):
                raise NotUpperHalfPlane("numeric M is not evaluated on the real axis")
            out[~up] = -np.conj(np.atleast_1d(self.m_minus(np.conj(flat[~up]))))
        return out.reshape(z.shape) if z.ndim else complex(out[0])

    def at_i(self) -> complex:
        """``F(i)``; numerically the limit of ``m_+(iy)`` as ``y -> infinity``.

        Analytically every atom contributes ``i w`` at ``lam = i``, so
        ``F(i) = a + i * mass`` without rounding in the atom terms.
        """
        if self.rep is not None:
            return complex(self.rep.shift, self.rep.mass)
        y = np.array(I_PROBE_Y)
        # for large y only W near 0 matters: a short doubling cut-off beats the tail seed
        try:
            vals = np.atleast_1d(_dirac.m_plus(self.potential, 1j * y, self.tol, method="doubling"))
        except NoConvergence:
            vals = np.atleast_1d(self.m_plus(1j * y))
        return richardson_limit(1 / y, vals)

    def derivative_at_i(self, radius: float = 0.25, n_nodes: int = 64) -> complex:
        """``F'(i)`` by the trapezoid rule on ``|lam - i| = radius``."""
        return complex(taylor_coefficients(self, 1j, radius, 2, n_nodes)[1])


FLike = Union[FFunction, HerglotzRep]


def as_F(F) -> FFunction:
    if isinstance(F, FFunction):
        return F
    if isinstance(F, HerglotzRep):
        return FFunction.analytic(F)
    if isinstance(F, DiracPotential):
        return FFunction.from_potential(F)
    raise InputError(f"cannot interpret {type(F).__name__} as an F function")


def m_pair_from_F(F: FLike, z):
    """``(m_+(z), m_-(z))`` of the reflectionless system with F function ``F``."""
    z = np.asarray(z, dtype=complex)
    if np.any(on_slit(z)):
        raise SlitInput("z on the slit [-1, 1]")
    if np.any(z.imag < 0):
        raise NotUpperHalfPlane("m_pair_from_F needs Im z >= 0")
    F = as_F(F)
    lam_p = phi_inverse(z, "semidisk")
    lam_m = phi_inverse(np.conj(z), "exterior")
    return F(lam_p), -np.conj(F(lam_m))


def F_from_potential(W: DiracPotential, lam, tol: float = 1e-10,
                     tail_seed: Optional[Callable] = None):
    """F function of ``W`` at ``lam`` (``Im lam > 0``, ``|lam| != 1``)."""
    lam = np.asarray(lam, dtype=complex)
    flat = np.atleast_1d(lam).ravel()
    if np.any(flat.imag <= 0):
        raise NotUpperHalfPlane("F is evaluated on the upper half plane")
    r = np.abs(flat)
    if np.any(r == 1):
        raise InputError("|lam| = 1 is the seam; approach it from one side")
    z = np.atleast_1d(phi(flat))
    out = np.empty(flat.shape, dtype=complex)
    inside = r < 1
    if np.any(inside):
        out[inside] = np.atleast_1d(_dirac.m_plus(W, z[inside], tol, tail_seed=tail_seed))
    if np.any(~inside):
        if W.domain[0] >= 0:
            raise DomainExceeded("|lam| > 1 needs the left half line")
        out[~inside] = -np.conj(np.atleast_1d(_dirac.m_minus(W, np.conj(z[~inside]), tol)))
    return out.reshape(lam.shape) if lam.ndim else complex(out[0])


def seam_mismatch(W: DiracPotential, theta, deltas=(0.02, 0.01, 0.005, 0.0025, 0.00125),
                  tol: float = 1e-11) -> float:
    """Gap between radial limits of ``F`` at ``e^{i theta}`` from both sides."""
    d = np.asarray(deltas, dtype=float)
    u = np.exp(1j * float(theta))
    inner = F_from_potential(W, (1 - d) * u, tol)
    outer = F_from_potential(W, (1 + d) * u, tol)
    return abs(richardson_limit(d, inner) - richardson_limit(d, outer))


def _m_pair_source(source, tol: float):
    if isinstance(source, DiracPotential):
        return lambda z: (_dirac.m_plus(source, z, tol), _dirac.m_minus(source, z, tol))
    if isinstance(source, _can.CanonicalSystem):
        return lambda z: (_can.m_plus(source, z, tol), _can.m_minus(source, z, tol))
    return lambda z: m_pair_from_F(source, z)


def reflectionless_defect(source, x_points, y_sequence=DEFAULT_Y, tol: float = 1e-12) -> float:
    """``max_x |m_+(x) + conj(m_-(x))|`` with boundary values extrapolated in ``y``.

    ``source`` is a potential, a canonical system or an F function.  The
    residual ``m_+(x + iy) + conj(m_-(x + iy))`` is sampled at each ``y``
    and extrapolated to ``y = 0`` by :func:`richardson_limit`.

    Raises
    ------
    ExtrapolationUnstable
        If the samples do not approach the extrapolated value monotonically.
    """
    x = np.asarray(x_points, dtype=float)
    y = np.asarray(y_sequence, dtype=float)
    if np.any(np.abs(x) <= 1):
        raise InputError("x_points must lie in |x| > 1")
    if np.any(y <= 0) or np.any(np.diff(y) >= 0):
        raise InputError("y_sequence must be positive and decreasing")
    pair = _m_pair_source(source, tol)
    worst = 0.0
    for xv in x:
        mp, mm = pair(xv + 1j * y)
        res = np.asarray(mp) + np.conj(np.asarray(mm))
        lim = richardson_limit(y, res)
        dev = np.abs(res - lim)
        slack = 1e-9 + 1e-6 * np.max(np.abs(res))
        if np.any(dev[1:] > 1.5 * dev[:-1] + slack):
            raise ExtrapolationUnstable(f"residuals do not settle at x = {xv}")
        worst = max(worst, abs(lim))
    return worst


def dirac_class_test(F, tol: float = 1e-8) -> bool:
    """``|F(i) - i| <= tol``."""
    return abs(as_F(F).at_i() - 1j) <= tol


def extreme_potential(theta: float) -> ConstantPotential:
    """``R_theta (0 -1; -1 0) R_theta^T``, whose F function is ``R_theta lam``."""
    s, c = math.sin(2 * theta), math.cos(2 * theta)
    return ConstantPotential([[s, -c], [-c, -s]], "trace_zero")


def beta_potential(beta: float) -> ConstantPotential:
    """``W_beta = (sin b, cos b; cos b, -sin b)``; equals ``extreme_potential((pi - beta)/2)``."""
    s, c = math.sin(beta), math.cos(beta)
    return ConstantPotential([[s, c], [c, -s]], "trace_zero")


def convex_combination(atoms: Sequence[tuple[float, float]], tol: float = 1e-12) -> FFunction:
    """``F = sum_j w_j R_{theta_j} lam`` for distinct ``theta_j`` in ``[0, pi)``."""
    atoms = [(float(t), float(w)) for t, w in atoms]
    if not atoms:
        raise BadWeights("empty combination")
    if any(not w > 0 for _, w in atoms) or abs(math.fsum(w for _, w in atoms) - 1) > tol:
        raise BadWeights("weights must be positive and sum to one")
    th = [t for t, _ in atoms]
    if any(not 0 <= t < math.pi for t in th) or len(set(th)) != len(th):
        raise BadWeights("angles must be distinct and lie in [0, pi)")
    return FFunction.analytic(HerglotzRep.from_rotations(atoms))


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class Record:
    check: str
    x: float
    value: float
    bound: float
    passed: bool


@dataclass
class CheckReport:
    """Records ``(check, x, value, bound, pass)`` plus named flags."""

    records: list = field(default_factory=list)
    flags: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.records)

    def add(self, check: str, x: float, value: float, bound: float, passed: bool):
        self.records.append(Record(check, float(x), float(value), float(bound), bool(passed)))

    def extend(self, other: "CheckReport"):
        self.records.extend(other.records)
        self.flags.update(other.flags)


def thm41_check(W: DiracPotential, x_points, F: Optional[FLike] = None, tol: float = 1e-6,
                eq_tol: float = 1e-9) -> CheckReport:
    """Check ``a^2 + b^2 <= 1`` and ``b(0) + i a(0) = -F'(i)``.

    ``W`` must be in the trace-zero gauge ``(a, b; b, -a)``.  The flag
    ``equality`` is raised when ``a^2 + b^2 = 1`` to ``eq_tol`` at every
    sampled point and ``W`` is constant across them.
    """
    if W.gauge != "trace_zero" and not W.check_gauge(x_points) :
        raise InputError("thm41_check needs a trace-zero potential")
    x = np.asarray(x_points, dtype=float)
    V = W(x)
    a, b = V[..., 0, 0], V[..., 0, 1]
    if np.max(np.abs(V[..., 0, 0] + V[..., 1, 1])) > 1e-9:
        raise InputError("thm41_check needs a trace-zero potential")
    rep = CheckReport()
    n2 = a * a + b * b
    for xv, v in zip(x, n2):
        rep.add("thm41_norm", xv, v, 1.0, v <= 1 + tol)
    if F is not None:
        V0 = W(0.0)
        dF = as_F(F).derivative_at_i()
        err = abs(complex(V0[0, 1], V0[0, 0]) + dF)
        rep.add("eq49_derivative", 0.0, err, tol, err <= tol)
    const = float(np.max(np.abs(V - V[0]))) <= eq_tol
    rep.flags["equality"] = bool(const and np.all(np.abs(n2 - 1) <= eq_tol))
    return rep


class Thm42Result(NamedTuple):
    lhs: float
    ok: bool

    def equality(self, tol: float = 1e-9) -> bool:
        return abs(self.lhs - 4) <= tol


def thm42_check(a, b, da, db, tol: float = 1e-6) -> Thm42Result:
    """``(b^2 - a^2 + b + b')^2 + (2ab + a + a')^2 <= 4``."""
    lhs = (b * b - a * a + b + db) ** 2 + (2 * a * b + a + da) ** 2
    lhs = float(np.max(lhs))
    return Thm42Result(lhs, lhs <= 4 + tol)


def thm52_check(H: "_can.CanonicalSystem", x_points, tol: float = 1e-8) -> CheckReport:
    """``||K(x)|| <= 2`` with ``K = H^{-1/2} H' H^{-1/2}``; flags ``equality`` when ``||K|| = 2`` throughout."""
    rep = CheckReport()
    norms = []
    for x in np.asarray(x_points, dtype=float):
        n = _can.k_matrix(H, x).norm
        norms.append(n)
        rep.add("thm52_norm", x, n, 2.0, n <= 2 + tol)
    rep.flags["equality"] = bool(np.all(np.abs(np.asarray(norms) - 2) <= tol))
    return rep


def disk_coefficients(F: FLike, N: int, radius: float = 0.2, n_nodes: int = 128) -> np.ndarray:
    """Taylor coefficients ``b_1..b_N`` at 0 of ``f = F(i (1+z)/(1-z))`` by quadrature."""
    F = as_F(F)
    f = lambda z: F(1j * (1 + z) / (1 - z))
    return taylor_coefficients(f, 0.0, radius, N + 1, n_nodes)[1:]


def lemma61_check(F: FLike, N_max: int = 16, tol: float = 1e-9) -> CheckReport:
    """``|b_N| <= 2 3^(N-1)`` for the disk transplant of a Dirac-class ``F``.

    ``b_N`` comes from the Taylor coefficients at ``i`` through
    :func:`refless.herglotz.disk_coeff_transform`; the record ``value`` is
    the ratio to the bound.
    """
    from .herglotz import disk_coeff_transform, taylor_at_i

    F = as_F(F)
    if F.is_analytic:
        a = taylor_at_i(F.rep, N_max)
    else:
        a = taylor_coefficients(F, 1j, 0.25, N_max + 1)[1:]
    rep = CheckReport()
    for N in range(1, N_max + 1):
        bound = 2.0 * 3.0 ** (N - 1)
        ratio = abs(disk_coeff_transform(a, N)) / bound
        rep.add("lemma61_disk", float(N), ratio, 1.0, ratio <= 1 + tol)
    return rep
