"""Riemann-sphere arithmetic, the map phi and finitely atomic Herglotz functions.

Points of the Riemann sphere are plain complex numbers; the point at
infinity is ``INF = complex(inf, 0)`` and anything with an infinite
component is treated as infinity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import GridMismatch, InputError, NonzeroShift, NotNormalized, SlitInput

INF = complex(np.inf, 0.0)
SLIT_TOL = 1e-12


def is_inf(z):
    """Elementwise test for the point at infinity."""
    return np.isinf(np.asarray(z, dtype=complex))


def _out(z, scalar):
    return complex(z) if scalar else z


def chordal(z, w):
    """Chordal distance ``2|z-w| / sqrt((1+|z|^2)(1+|w|^2))`` on the sphere."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    scalar = z.ndim == 0 and w.ndim == 0
    z, w = np.broadcast_arrays(z, w)
    zi, wi = is_inf(z), is_inf(w)
    zf = np.where(zi, 0, z)
    wf = np.where(wi, 0, w)
    d = 2 * np.abs(zf - wf) / np.sqrt((1 + np.abs(zf) ** 2) * (1 + np.abs(wf) ** 2))
    d = np.where(zi & ~wi, 2 / np.sqrt(1 + np.abs(wf) ** 2), d)
    d = np.where(wi & ~zi, 2 / np.sqrt(1 + np.abs(zf) ** 2), d)
    d = np.where(zi & wi, 0.0, d)
    return float(d) if scalar else d


def mobius(M, z):
    """Apply 2x2 (possibly complex, possibly batched) matrices to sphere points.

    ``M`` has shape ``(..., 2, 2)`` and broadcasts against ``z``.
    """
    M = np.asarray(M)
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0 and M.ndim == 2
    a, b, c, d = M[..., 0, 0], M[..., 0, 1], M[..., 1, 0], M[..., 1, 1]
    zi = is_inf(z)
    zf = np.where(zi, 0, z)
    num = np.where(zi, a, a * zf + b)
    den = np.where(zi, c, c * zf + d)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den == 0, INF, num / np.where(den == 0, 1, den))
    return _out(out, scalar)


@dataclass(frozen=True)
class MoebiusMap:
    """Real linear fractional map, stored with determinant one.

    The sign is canonicalised (``c > 0``, or ``c == 0`` and ``d > 0``) so that
    ``A`` and ``-A`` compare and hash equal.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        vals = [float(v) for v in (self.a, self.b, self.c, self.d)]
        det = vals[0] * vals[3] - vals[1] * vals[2]
        if not det > 0:
            raise InputError(f"Moebius map needs a positive determinant, got {det}")
        s = math.sqrt(det)
        vals = [v / s for v in vals]
        if vals[2] < 0 or (vals[2] == 0 and vals[3] < 0):
            vals = [-v for v in vals]
        for name, v in zip("abcd", vals):
            object.__setattr__(self, name, v)

    @classmethod
    def from_matrix(cls, M) -> "MoebiusMap":
        M = np.asarray(M, dtype=float)
        return cls(M[0, 0], M[0, 1], M[1, 0], M[1, 1])

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def __call__(self, z):
        return mobius(self.matrix, z)

    def isclose(self, other: "MoebiusMap", tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.matrix - other.matrix)) <= tol)


def moebius_apply(A: MoebiusMap, z):
    """Image of ``z`` under ``A``; ``A(inf) = a/c``."""
    return A(z)


def rotation(beta: float) -> MoebiusMap:
    """The rotation ``R_beta``; every rotation fixes ``i``."""
    c, s = math.cos(beta), math.sin(beta)
    # exact zeros at multiples of pi/2
    c = 0.0 if abs(c) < 1e-15 else c
    s = 0.0 if abs(s) < 1e-15 else s
    return MoebiusMap(c, -s, s, c)


def rotation_matrix(beta):
    """Batched rotation matrices, shape ``(..., 2, 2)``."""
    beta = np.asarray(beta, dtype=float)
    c, s = np.cos(beta), np.sin(beta)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def phi(lam):
    """The conformal map ``phi(lam) = 2 lam / (lam^2 + 1)``."""
    lam = np.asarray(lam, dtype=complex)
    scalar = lam.ndim == 0
    li = is_inf(lam)
    lf = np.where(li, 0, lam)
    den = lf * lf + 1
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den == 0, INF, 2 * lf / np.where(den == 0, 1, den))
    out = np.where(li, 0, out)
    return _out(out, scalar)


def on_slit(z, tol: float = SLIT_TOL):
    z = np.asarray(z, dtype=complex)
    return ~is_inf(z) & (np.abs(z.imag) <= tol) & (np.abs(z.real) <= 1 + tol)


def phi_inverse(z, branch: str = "semidisk", tol: float = SLIT_TOL):
    """Preimage of ``z`` under :func:`phi`.

    The two preimages are ``lam`` and ``1/lam``.  ``branch="semidisk"``
    returns the one with ``|lam| < 1``; ``"exterior"`` returns the one with
    ``|lam| > 1``.  On the unit circle (``z`` real with ``|z| > 1``) the
    semidisk branch takes the root with ``Im lam >= 0``.

    Raises
    ------
    SlitInput
        If ``z`` lies on ``[-1, 1]``.
    """
    if branch not in ("semidisk", "exterior"):
        raise InputError(f"unknown branch {branch!r}")
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    if np.any(on_slit(z, tol)):
        raise SlitInput("phi_inverse is undefined on the slit [-1, 1]")
    zi = is_inf(z)
    u = np.where(zi, 0, 1 / np.where(zi, 1, z))
    s = np.sqrt(u * u - 1)
    r1, r2 = u + s, u - s
    big = np.where(np.abs(r1) >= np.abs(r2), r1, r2)
    small = 1 / big
    circ = np.abs(np.abs(big) - 1) <= 1e-14
    up = np.where(big.imag >= 0, big, small)
    inner = np.where(circ, up, small)
    outer = np.where(circ, 1 / up, big)
    out = inner if branch == "semidisk" else outer
    return _out(out, scalar)


def phi_expansion_coeff(n: int) -> complex:
    """Laurent coefficient of ``phi(i + h)`` at ``h**n``."""
    if n < -1:
        raise InputError("n must be >= -1")
    if n == -1:
        return 1.0 + 0j
    return -((0.5j) ** (n + 1))


def _kernel(t: float, lam):
    if math.isinf(t):
        return lam
    return (1 + t * lam) / (t - lam)


@dataclass(frozen=True)
class HerglotzRep:
    """Finitely atomic Herglotz function ``a + sum w_j (1 + t_j lam)/(t_j - lam)``.

    Parameters
    ----------
    shift : float
        The real constant ``a``.
    atoms : sequence of (t, w)
        Atom locations on the extended real line (``math.inf`` allowed)
        and positive weights.
    """

    shift: float
    atoms: tuple

    def __post_init__(self):
        atoms = tuple((float(t), float(w)) for t, w in self.atoms)
        locs = [math.inf if math.isinf(t) else t for t, _ in atoms]
        if any(not w > 0 for _, w in atoms):
            raise InputError("atom weights must be positive")
        if len(set(locs)) != len(locs):
            raise InputError("atom locations must be distinct")
        if any(math.isnan(t) for t in locs):
            raise InputError("atom location is NaN")
        object.__setattr__(self, "atoms", tuple((l, w) for l, (_, w) in zip(locs, atoms)))
        object.__setattr__(self, "shift", float(self.shift))

    @property
    def mass(self) -> float:
        return math.fsum(w for _, w in self.atoms)

    def __call__(self, lam):
        return herglotz_eval(self, lam)

    def to_dict(self) -> dict:
        return {
            "shift": self.shift,
            "atoms": [{"t": "inf" if math.isinf(t) else t, "w": w} for t, w in self.atoms],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HerglotzRep":
        try:
            atoms = []
            for a in d["atoms"]:
                t = a["t"]
                t = math.inf if isinstance(t, str) and t.lower() in ("inf", "infinity") else float(t)
                atoms.append((t, float(a["w"])))
            return cls(float(d.get("shift", 0.0)), tuple(atoms))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed Herglotz record: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "HerglotzRep":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_rotations(cls, atoms: Iterable[tuple[float, float]]) -> "HerglotzRep":
        """Build ``sum w_j R_{theta_j} lam`` from ``(theta_j, w_j)`` pairs."""
        return cls(0.0, tuple((theta_to_location(th), w) for th, w in atoms))


def herglotz_eval(rep: HerglotzRep, lam):
    """Evaluate the representation at ``lam``; ``F(i) = a + i * mass``."""
    lam = np.asarray(lam, dtype=complex)
    out = np.full(lam.shape, rep.shift, dtype=complex)
    for t, w in rep.atoms:
        out = out + w * _kernel(t, lam)
    return complex(out) if out.ndim == 0 else out


def location_to_theta(t: float) -> float:
    """Angle with ``R_theta lam = (1 + t lam)/(t - lam)``, reduced to ``[0, pi)``."""
    if math.isinf(t):
        return 0.0
    return math.atan2(-1.0, t) % math.pi


def theta_to_location(theta: float) -> float:
    theta = theta % math.pi
    if theta == 0.0:
        return math.inf
    return -math.cos(theta) / math.sin(theta)


def rotation_form(rep: HerglotzRep) -> list[tuple[float, float]]:
    """Atoms as ``(theta_j, w_j)`` so that ``F = sum w_j R_{theta_j} lam``."""
    if rep.shift != 0:
        raise NonzeroShift("rotation form needs a = 0")
    return [(location_to_theta(t), w) for t, w in rep.atoms]


def taylor_at_i(rep: HerglotzRep, N: int, tol: float = 1e-12) -> np.ndarray:
    """Coefficients ``f_1..f_N`` of ``F(i + h) = i + sum f_n h^n``.

    Requires ``a = 0`` and unit mass (so that ``F(i) = i``).
    """
    if abs(rep.shift) > tol or abs(rep.mass - 1) > tol:
        raise NotNormalized("taylor_at_i needs a = 0 and total mass 1")
    n = np.arange(1, N + 1)
    f = np.zeros(N, dtype=complex)
    for t, w in rep.atoms:
        if math.isinf(t):
            f[0] += w
        else:
            f += w * (1 + t * t) / (t - 1j) ** (n + 1)
    return f


def disk_coeff_transform(a_seq: Sequence[complex], N: int) -> complex:
    """``b_N = sum_{n=1}^N (2i)^n a_n C(N-1, n-1)``."""
    if N < 1 or len(a_seq) < N:
        raise InputError("need N >= 1 and at least N coefficients")
    return complex(sum((2j) ** n * complex(a_seq[n - 1]) * math.comb(N - 1, n - 1)
                       for n in range(1, N + 1)))


def circle_nodes(center: complex, radius: float, n_nodes: int, offset: bool = True) -> np.ndarray:
    """Nodes on ``|z - center| = radius``, rotated by half a spacing when ``offset``."""
    shift = 0.5 if offset else 0.0
    return center + radius * np.exp(2j * np.pi * (np.arange(n_nodes) + shift) / n_nodes)


def coefficients_from_samples(vals, radius: float, n_terms: int, offset: bool = True) -> np.ndarray:
    """Discrete Cauchy formula for samples taken at :func:`circle_nodes`."""
    vals = np.asarray(vals, dtype=complex)
    n_nodes = vals.shape[-1]
    if n_terms > n_nodes:
        raise InputError("n_terms must not exceed n_nodes")
    shift = 0.5 if offset else 0.0
    k = np.arange(n_nodes)
    c = np.fft.fft(vals, axis=-1) / n_nodes
    c = c * np.exp(-2j * np.pi * shift * k / n_nodes) / radius ** k.astype(float)
    return c[..., :n_terms]


def taylor_coefficients(f: Callable, center: complex, radius: float, n_terms: int,
                        n_nodes: int = 128, offset: bool = True) -> np.ndarray:
    """Taylor coefficients of ``f`` about ``center`` by the discrete Cauchy formula.

    Nodes sit on ``|z - center| = radius``.  With ``offset`` they are rotated
    by half a node spacing, which keeps them off the real axis when the
    centre is real.
    """
    if n_terms > n_nodes:
        raise InputError("n_terms must not exceed n_nodes")
    vals = np.asarray(f(circle_nodes(center, radius, n_nodes, offset)), dtype=complex)
    return coefficients_from_samples(vals, radius, n_terms, offset)


def disk_boundary_grid(n: int = 256) -> np.ndarray:
    """Equispaced points on ``|z - 2i| = 1``."""
    return 2j + np.exp(2j * np.pi * np.arange(n) / n)


def herglotz_distance(F_samples, G_samples, grid_F=None, grid_G=None) -> float:
    """Sampled surrogate for ``max_{|z-2i|<=1} chordal(F(z), G(z))``.

    ``F_samples`` and ``G_samples`` are values on a common grid, or callables
    evaluated on :func:`disk_boundary_grid`.
    """
    if grid_F is not None and grid_G is not None:
        if np.shape(grid_F) != np.shape(grid_G) or not np.allclose(grid_F, grid_G, rtol=0, atol=1e-14):
            raise GridMismatch("samples were taken on different grids")
    grid = disk_boundary_grid()
    F = F_samples(grid) if callable(F_samples) else np.asarray(F_samples, dtype=complex)
    G = G_samples(grid) if callable(G_samples) else np.asarray(G_samples, dtype=complex)
    if np.shape(F) != np.shape(G):
        raise GridMismatch("sample arrays differ in shape")
    return float(np.max(chordal(F, G)))
