"""Expansion coefficients of m at infinity, their evolution and bound tables.

Two charts are used.  In the ``h`` chart ``F(i + h) = i + sum f_n h^n``; in
the ``w`` chart ``m_+(t; -1/w) = i + sum g_n(t) w^n``.  Sequences are stored
0-based: ``coefficients[0]`` is the coefficient of order 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (InputError, InsufficientCoefficients, InsufficientDepth,
                     NotNormalized, RadiusTooLarge)
from .herglotz import HerglotzRep, phi_expansion_coeff, taylor_at_i, taylor_coefficients

CHARTS = ("h_chart", "w_chart")


@dataclass(frozen=True)
class SeriesAtInfinity:
    chart: str
    coefficients: np.ndarray
    radius: float

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise InputError(f"unknown chart {self.chart!r}")

    def __getitem__(self, n: int) -> complex:
        """1-based access: ``s[1]`` is the first coefficient."""
        if n < 1:
            raise IndexError("coefficients start at order 1")
        return complex(self.coefficients[n - 1])

    def __len__(self):
        return len(self.coefficients)

    def __call__(self, x):
        """Evaluate the truncated series (no constant term)."""
        x = np.asarray(x, dtype=complex)
        out = np.zeros(x.shape, dtype=complex)
        for c in self.coefficients[::-1]:
            out = (out + c) * x
        return out


# ---------------------------------------------------------------------------
# power series helpers; arrays hold orders 1..N


def series_mul(a, b, N: int) -> np.ndarray:
    """Product of two series without constant terms, orders 1..N."""
    full = np.convolve(np.concatenate([[0], a[:N]]), np.concatenate([[0], b[:N]]))
    out = np.zeros(N, dtype=complex)
    m = min(N, len(full) - 1)
    out[:m] = full[1:m + 1]
    return out


def compose(outer, inner, N: int) -> np.ndarray:
    """Coefficients 1..N of ``outer(inner(x))``; both lack constant terms."""
    outer = np.asarray(outer, dtype=complex)
    inner = np.asarray(inner, dtype=complex)
    out = np.zeros(N, dtype=complex)
    power = np.zeros(N, dtype=complex)
    power[:min(N, len(inner))] = inner[:N]
    for k in range(min(N, len(outer))):
        out += outer[k] * power
        power = series_mul(power, inner, N)
    return out


def w_of_h(N: int) -> np.ndarray:
    """Chart change ``w = -1/phi(i + h)``, orders 1..N.

    ``h phi(i + h) = 1 + sum_{n>=0} c_n h^{n+1}`` with ``c_n`` from
    :func:`refless.herglotz.phi_expansion_coeff`; invert that unit series.
    """
    u = np.zeros(N + 1, dtype=complex)
    u[0] = 1.0
    for n in range(N):
        u[n + 1] = phi_expansion_coeff(n)
    inv = np.zeros(N, dtype=complex)
    inv[0] = 1.0
    for k in range(1, N):
        inv[k] = -sum(u[j] * inv[k - j] for j in range(1, k + 1))
    return -inv


def h_of_w(N: int) -> np.ndarray:
    """Inverse chart change ``h = -w + i(sqrt(1 - w^2) - 1)``, orders 1..N."""
    out = np.zeros(N, dtype=complex)
    out[0] = -1.0
    for k in range(1, N // 2 + 1):
        if 2 * k <= N:
            out[2 * k - 1] = 1j * _binom_half(k) * (-1) ** k
    return out


def _binom_half(k: int) -> float:
    c = 1.0
    for j in range(k):
        c *= (0.5 - j) / (j + 1)
    return c


def f_to_g(f, N: int) -> np.ndarray:
    return compose(f, h_of_w(N), N)


def g_to_f(g, N: int) -> np.ndarray:
    return compose(g, w_of_h(N), N)


# ---------------------------------------------------------------------------
# coefficient extraction


def g_from_F(F, N: int, r_hint: float = 1.0, n_nodes: int = 128,
             decay_tol: float = 1e-8) -> SeriesAtInfinity:
    """Coefficients ``g_1..g_N`` of ``M(-1/w) - i`` by quadrature on ``|w| = r_hint/2``.

    Raises
    ------
    RadiusTooLarge
        If the computed coefficients do not decay, i.e. the circle reaches
        a singularity of ``g``.
    """
    from .reflectionless import as_F

    F = as_F(F)
    if not r_hint > 0:
        raise InputError("r_hint must be positive")
    if 2 * N > n_nodes:
        raise InputError("need n_nodes >= 2 N")
    rho = r_hint / 2
    if rho >= 1:
        raise RadiusTooLarge("|w| >= 1 reaches the slit")

    def g(w):
        return F.M(-1 / w) - 1j

    try:
        c = taylor_coefficients(g, 0.0, rho, n_nodes, n_nodes)
    except Exception as exc:
        if isinstance(exc, (ArithmeticError, ValueError)):
            raise RadiusTooLarge(f"evaluation failed on |w| = {rho}: {exc}") from exc
        raise
    scaled = np.abs(c) * rho ** np.arange(n_nodes)
    tail = scaled[3 * n_nodes // 8: n_nodes // 2]
    if not np.all(np.isfinite(scaled)) or np.max(tail) > decay_tol * max(1.0, np.max(scaled)):
        raise RadiusTooLarge(f"coefficients do not decay on |w| = {rho}")
    return SeriesAtInfinity("w_chart", c[1:N + 1].copy(), r_hint)


def f_from_F(F, N: int, tol: float = 1e-10, radius: float = 0.25,
             n_nodes: int = 128) -> SeriesAtInfinity:
    """Coefficients ``f_1..f_N`` of ``F(i + h) - i``.

    Analytic F functions use :func:`refless.herglotz.taylor_at_i`; numeric
    ones use quadrature on ``|h| = radius``.
    """
    from .reflectionless import as_F

    F = as_F(F)
    if F.is_analytic:
        return SeriesAtInfinity("h_chart", taylor_at_i(F.rep, N, tol), radius)
    c = taylor_coefficients(F, 1j, radius, N + 1, n_nodes)
    if abs(c[0] - 1j) > tol:
        raise NotNormalized("F(i) != i")
    return SeriesAtInfinity("h_chart", c[1:N + 1].copy(), radius)


# ---------------------------------------------------------------------------
# evolution


def g_evolution_rhs(g: Sequence[complex], q: float, p: float, n: int) -> complex:
    """``g_n' = sum_{j=1}^n g_j g_{n+1-j} - 2 q g_n + 2 i g_{n+1}``.

    ``p`` only enters through ``g_1 = q + i p`` and is accepted for symmetry.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    if len(g) < n + 1:
        raise InsufficientCoefficients(f"need g_1..g_{n + 1}")
    g = np.asarray(g, dtype=complex)
    # same summation order as the cascade
    quad = np.convolve(g[:n], g[:n])[n - 1]
    return complex(quad - 2 * q * g[n - 1] + 2j * g[n])


def f_evolution_rhs(f: Sequence[complex], q: float, n: int) -> complex:
    """Right side of the evolution of ``f_n``; empty sums vanish.

    ``f_n' = -sum_{j=1}^n f_j f_{n+1-j}
    + sum_{k=0}^{n-2} (i/2)^{k+1} sum_{j=1}^{n-1-k} f_j f_{n-k-j}
    - 2 q f_n - 2 i f_{n+1} - sum_{k=0}^{n-1} (i/2)^k f_{n-k}``.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    if len(f) < n + 1:
        raise InsufficientCoefficients(f"need f_1..f_{n + 1}")
    F = lambda j: complex(f[j - 1])
    out = -sum(F(j) * F(n + 1 - j) for j in range(1, n + 1))
    for k in range(0, n - 1):
        out += (0.5j) ** (k + 1) * sum(F(j) * F(n - k - j) for j in range(1, n - k))
    out -= 2 * q * F(n)
    out -= 2j * F(n + 1)
    out -= sum((0.5j) ** k * F(n - k) for k in range(0, n))
    return complex(out)


@dataclass(frozen=True)
class CoeffTable:
    """Normalized derivatives ``h[n, N] = g_n^{(N)}/N!``.

    Stored in an array indexed ``[n, N]`` with ``n`` 1-based (row 0 is
    unused).  Entries outside the triangle ``n <= n_max - N`` are NaN.
    """

    h: np.ndarray
    n_max: int
    N_max: int

    def __getitem__(self, idx):
        return self.h[idx]

    def available(self, n: int, N: int) -> bool:
        return 1 <= n <= self.n_max - N and 0 <= N <= self.N_max


def derivative_cascade(g0: Sequence[complex], N_max: int) -> CoeffTable:
    """Fill ``h[n, N]`` from ``g_n(t0)`` by the quadratic recursion.

    ``(N+1) h_n(N+1) = sum_d sum_j h_j(d) h_{n+1-j}(N-d)
    - 2 sum_d Re h_1(d) h_n(N-d) + 2 i h_{n+1}(N)``, which consumes one
    order in ``n`` per order in ``N``.
    """
    g0 = np.asarray(g0, dtype=complex)
    n_max = len(g0)
    if n_max < N_max + 1:
        raise InsufficientDepth("need n_max >= N_max + 1")
    h = np.full((n_max + 2, N_max + 1), np.nan, dtype=complex)
    h[1:n_max + 1, 0] = g0
    h[n_max + 1, 0] = 0.0
    for N in range(N_max):
        top = n_max - N - 1
        quad = np.zeros(top, dtype=complex)
        lin = np.zeros(top, dtype=complex)
        for d in range(N + 1):
            u = h[1:top + 1, d]
            v = h[1:top + 1, N - d]
            quad += np.convolve(u, v)[:top]
            lin += h[1, d].real * v
        h[1:top + 1, N + 1] = (quad - 2 * lin + 2j * h[2:top + 2, N]) / (N + 1)
    h[n_max + 1, 0] = np.nan
    return CoeffTable(h[:n_max + 1], n_max, N_max)


# ---------------------------------------------------------------------------
# bounds


def _up(x: Fraction) -> float:
    f = float(x)
    if Fraction(f) < x:
        f = math.nextafter(f, math.inf)
    return f


def _exact_r(r) -> Fraction:
    if isinstance(r, Fraction):
        return r
    if isinstance(r, str):
        return Fraction(r)
    fr = Fraction(float(r))
    if not fr > 0:
        raise InputError("r must be positive")
    return fr


@dataclass(frozen=True)
class BoundTable:
    """Majorants ``A[n][N] <= B[n][N]`` of ``|h_n(N)|``.

    ``A_exact``/``B_exact`` hold rationals (``None`` outside the computed
    triangle); ``A``/``B`` are float arrays rounded upward.
    """

    r: Fraction
    n_max: int
    N_max: int
    A_exact: list
    B_exact: list
    A: np.ndarray
    B: np.ndarray


def bound_tables(r, n_max: int, N_max: int) -> BoundTable:
    """Evaluate the A and B recursions exactly.

    ``(N+1) A_n(N+1) = sum sum A_j A_{n+1-j} + 2 sum_d A_1(d) A_n(N-d) + 2 A_{n+1}(N)``
    and ``(N+1) B_n(N+1) = 3 sum sum B_j B_{n+1-j} + 2 n B_{n+1}(N)``, both
    starting from ``(3/r)^n``.
    """
    if n_max < N_max + 1:
        raise InsufficientDepth("need n_max >= N_max + 1")
    R = _exact_r(r)
    A = [[None] * (N_max + 1) for _ in range(n_max + 2)]
    B = [[None] * (N_max + 1) for _ in range(n_max + 2)]
    for n in range(1, n_max + 1):
        A[n][0] = B[n][0] = (3 / R) ** n
    for N in range(N_max):
        for n in range(1, n_max - N):
            qa = sum(A[j][d] * A[n + 1 - j][N - d] for d in range(N + 1) for j in range(1, n + 1))
            qb = sum(B[j][d] * B[n + 1 - j][N - d] for d in range(N + 1) for j in range(1, n + 1))
            la = sum(A[1][d] * A[n][N - d] for d in range(N + 1))
            A[n][N + 1] = (qa + 2 * la + 2 * A[n + 1][N]) / (N + 1)
            B[n][N + 1] = (3 * qb + 2 * n * B[n + 1][N]) / (N + 1)
    Af = np.full((n_max + 1, N_max + 1), np.nan)
    Bf = np.full((n_max + 1, N_max + 1), np.nan)
    for n in range(1, n_max + 1):
        for N in range(N_max + 1):
            if A[n][N] is not None:
                Af[n, N] = _up(A[n][N])
                Bf[n, N] = _up(B[n][N])
    return BoundTable(R, n_max, N_max, A[:n_max + 1], B[:n_max + 1], Af, Bf)


def cauchy_coeffs_exact(r, n: int, N: int) -> Fraction:
    """``C_n(N) = 3^n 15^N C(N+n-1, N) / r^(n+N)``, the coefficients of ``3/(r - 3w - 15t)``."""
    if n < 1 or N < 0:
        raise InputError("need n >= 1 and N >= 0")
    R = _exact_r(r)
    return Fraction(3 ** n * 15 ** N * math.comb(N + n - 1, N)) / R ** (n + N)


def cauchy_coeffs(r, n: int, N: int) -> float:
    """Float value of :func:`cauchy_coeffs_exact`, rounded upward."""
    return _up(cauchy_coeffs_exact(r, n, N))
