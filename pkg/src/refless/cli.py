"""Command line interface: ``refless <command> [options]``.

Exit codes: 0 success, 1 usage or spec error, 2 numerical failure,
3 failed property suite.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import canonical as can
from . import dirac
from . import io as rio
from . import reflectionless as rl
from .errors import InputError, ReflessError
from .herglotz import HerglotzRep, MoebiusMap
from .reconstruct import TAILS, forward_validate, reconstruct_potential
from .series import bound_tables, cauchy_coeffs_exact, derivative_cascade, f_from_F, g_from_F

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_SUITE = 0, 1, 2, 3
SUITES = ("refless", "thm41", "thm42", "thm52", "lemma61")
SEAM_FLAG = 1e-4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class Result:
    """A table plus a report; rendered as CSV (table only) or JSON (both)."""

    def __init__(self, kind: str, columns: Sequence[str], rows: list, report: Optional[dict] = None,
                 extra: Optional[dict] = None, status: int = EXIT_OK):
        self.kind, self.columns, self.rows = kind, list(columns), rows
        self.report = report or {}
        self.extra = extra
        self.status = status

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return rio.csv_text(self.kind, self.columns, self.rows)
        body = {"kind": self.kind, "columns": self.columns, "rows": self.rows, "report": self.report}
        if self.extra is not None:
            body.update(self.extra)
        return rio.json_text(body)


# ---------------------------------------------------------------------------
# grids


def _complex_list(values) -> list:
    try:
        return [complex(v.replace(" ", "").replace("i", "j")) for v in values]
    except ValueError as exc:
        raise InputError(f"bad complex number: {exc}") from exc


def _grid(args, default_re, default_im, explicit) -> np.ndarray:
    if explicit:
        return np.array(_complex_list(explicit))
    re = np.linspace(*(args.re or default_re[:2]), int((args.re or default_re)[2]))
    im = np.linspace(*(args.im or default_im[:2]), int((args.im or default_im)[2]))
    return (re[None, :] + 1j * im[:, None]).ravel()


def _range(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected lo:hi:n")
    return float(parts[0]), float(parts[1]), int(parts[2])


# ---------------------------------------------------------------------------
# commands


def cmd_mfunc(args) -> Result:
    spec = rio.load_spec(args.spec)
    kind = rio.spec_kind(spec)
    z = _grid(args, (-2, 2, 5), (0.5, 2, 4), args.z)
    if np.any(z.imag <= 0):
        raise InputError("z must lie in the upper half plane")
    tol = args.tol or 1e-10
    if kind == "potential":
        W = rio.potential_from_spec(spec)
        m = dirac.m_plus(W, z, tol) if args.side == "plus" else dirac.m_minus(W, z, tol)
    elif kind == "canonical":
        H = rio.canonical_from_spec(spec)
        m = can.m_plus(H, z, max(tol, 1e-8)) if args.side == "plus" else can.m_minus(H, z, max(tol, 1e-8))
    else:
        mp, mm = rl.m_pair_from_F(rio.F_from_spec(spec), z)
        m = mp if args.side == "plus" else mm
    m = np.atleast_1d(m)
    rows = [[zz.real, zz.imag, mm.real, mm.imag] for zz, mm in zip(z, m)]
    return Result(f"mfunc_{args.side}", ["re_z", "im_z", "re_m", "im_m"], rows, {"side": args.side})


def cmd_ffunc(args) -> Result:
    spec = rio.load_spec(args.spec)
    kind = rio.spec_kind(spec)
    lam = _grid(args, (-1.5, 1.5, 7), (0.25, 2.25, 5), args.lam)
    lam = lam[np.abs(np.abs(lam) - 1) > 1e-3]
    tol = args.tol or 1e-10
    report = {}
    if kind == "potential":
        W = rio.potential_from_spec(spec)
        F = rl.FFunction.from_potential(W, tol=tol)
        seams = []
        if W.domain[0] == -math.inf:
            for th in np.linspace(math.pi / 6, 5 * math.pi / 6, 5):
                seams.append({"theta": float(th), "mismatch": rl.seam_mismatch(W, th)})
        worst = max((s["mismatch"] for s in seams), default=0.0)
        report.update(seam=seams, seam_max=worst, seam_flagged=bool(worst > SEAM_FLAG))
    elif kind == "F":
        F = rio.F_from_spec(spec)
    else:
        raise InputError("ffunc takes a potential or F spec")
    vals = np.atleast_1d(F(lam))
    Fi = F.at_i()
    report.update(F_at_i=Fi, F_at_i_residual=abs(Fi - 1j))
    rows = [[l.real, l.imag, v.real, v.imag] for l, v in zip(lam, vals)]
    return Result("ffunc", ["re_lambda", "im_lambda", "re_F", "im_F"], rows, report)


def cmd_coeffs(args) -> Result:
    F = rio.F_from_spec(args.spec)
    N, r = args.N, args.r
    rows = []
    f = f_from_F(F, N)
    for n, c in enumerate(f.coefficients, 1):
        rows.append(["h_chart", n, 0, c.real, c.imag, 1.0, abs(c)])
    g = g_from_F(F, max(N, args.cascade + 1), r)
    for n, c in enumerate(g.coefficients[:N], 1):
        b = (3 / r) ** n
        rows.append(["w_chart", n, 0, c.real, c.imag, b, abs(c) / b])
    report = {"N": N, "r": r}
    if args.cascade > 0:
        n_max = args.cascade + 1
        T = derivative_cascade(g.coefficients[:n_max], args.cascade)
        B = bound_tables(r, n_max, args.cascade).B
        worst = 0.0
        for NN in range(args.cascade + 1):
            for n in range(1, n_max - NN + 1):
                c = T.h[n, NN]
                rows.append(["cascade", n, NN, c.real, c.imag, B[n, NN], abs(c) / B[n, NN]])
                worst = max(worst, abs(c) / B[n, NN])
        report["cascade_bound_ratio"] = worst
    report["max_ratio"] = max(row[6] for row in rows[N:]) if len(rows) > N else 0.0
    return Result("coeffs", ["chart", "n", "N", "re", "im", "bound", "ratio"], rows, report)


def cmd_bounds(args) -> Result:
    T = bound_tables(Fraction(args.r), args.nmax, args.Nmax)
    rows = []
    for n in range(1, args.nmax + 1):
        for N in range(args.Nmax + 1):
            if T.A_exact[n][N] is None:
                continue
            C = cauchy_coeffs_exact(T.r, n, N)
            if args.exact:
                rows.append([n, N, str(T.A_exact[n][N]), str(T.B_exact[n][N]), str(C)])
            else:
                rows.append([n, N, T.A[n, N], T.B[n, N], float(C)])
    report = {"r": str(T.r), "B_equals_C": all(T.B_exact[n][N] == cauchy_coeffs_exact(T.r, n, N)
                                               for n in range(1, args.nmax + 1) for N in range(args.Nmax + 1)
                                               if T.B_exact[n][N] is not None)}
    return Result("bounds", ["n", "N", "A", "B", "C"], rows, report)


def cmd_reconstruct(args) -> Result:
    F = rio.F_from_spec(args.spec)
    R = reconstruct_potential(F, x_max=args.xmax, n_max=args.nmax, N_max=args.Nmax, rho=args.rho,
                              r=args.r, reseed_every=args.reseed_every)
    report = dict(R.report)
    if not args.no_validate:
        lam = None if args.tail == "series" else [0.2j, 0.5j, 0.3 + 0.3j]
        report["validation_residual"] = forward_validate(R, F, lam, tail=args.tail)
        report["validation_tail"] = args.tail
    rows = [list(v) for v in zip(R.x, R.p, R.q, R.a, R.b)]
    return Result("reconstruct", ["x", "p", "q", "a", "b"], rows, report)


def _central(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2 * h)


def _verify_source(args):
    """``(W_trace_zero, dab, H, F, x_points)`` for the suites."""
    spec = rio.load_spec(args.spec)
    kind = rio.spec_kind(spec)
    x = np.linspace(0.0, args.xmax, args.points)
    if kind == "F":
        F = rio.F_from_spec(spec)
        R = reconstruct_potential(F, x_max=args.xmax)
        P = R.potential
        Wt = P.trace_zero()
        grid = np.linspace(0.0, args.xmax, 201)
        return Wt, P.dab, can.dirac_to_canonical(P, grid), F, x, F
    if kind != "potential":
        raise InputError("verify takes a potential or F spec")
    W = rio.potential_from_spec(spec)
    if not W.check_gauge(x) or W.gauge == "offdiag_zero":
        raise InputError("verify needs a trace-zero potential")

    def dab(xs):
        xs = np.asarray(xs, dtype=float)
        if isinstance(W, dirac.ConstantPotential):
            return np.zeros(xs.shape), np.zeros(xs.shape)
        d = _central(W, xs)
        return d[..., 0, 0], d[..., 0, 1]
    full_line = W.domain[0] == -math.inf and W.domain[1] == math.inf
    H = can.dirac_to_canonical(W) if isinstance(W, dirac.ConstantPotential) else \
        can.dirac_to_canonical(W, np.linspace(0.0, args.xmax, 201))
    F = rl.FFunction.from_potential(W) if full_line else None
    return W, dab, H, F, x, W


def cmd_verify(args) -> Result:
    names = [s.strip() for s in args.suite.split(",") if s.strip()]
    if not names:
        raise UsageError("empty suite name")
    if names == ["all"]:
        names = list(SUITES)
    bad = [s for s in names if s not in SUITES]
    if bad:
        raise UsageError(f"unknown suite(s) {bad}; choose from {SUITES} or 'all'")
    Wt, dab, H, F, x, source = _verify_source(args)
    rows, flags = [], {}

    def take(suite, rep):
        for r in rep.records:
            rows.append([suite, r.check, r.x, r.value, r.bound, r.passed])
        for k, v in rep.flags.items():
            flags[f"{suite}.{k}"] = v

    for s in names:
        if s == "refless":
            rep = rl.CheckReport()
            if isinstance(source, dirac.DiracPotential) and source.domain[0] > -math.inf:
                raise InputError("the refless suite needs a potential on the whole line")
            for xp in (-5.0, -2.0, -1.5, 1.5, 2.0, 5.0):
                d = rl.reflectionless_defect(source, [xp])
                rep.add("refless_defect", xp, d, 1e-5, d < 1e-5)
            take(s, rep)
        elif s == "thm41":
            take(s, rl.thm41_check(Wt, x, F=F))
        elif s == "thm42":
            V = Wt(x)
            a, b = V[..., 0, 0], V[..., 0, 1]
            da, db = dab(x)
            rep = rl.CheckReport()
            lhs = (b * b - a * a + b + db) ** 2 + (2 * a * b + a + da) ** 2
            for xv, v in zip(x, lhs):
                rep.add("thm42_lhs", xv, v, 4.0, v <= 4 + 1e-6)
            rep.flags["equality"] = bool(np.all(np.abs(lhs - 4) <= 1e-9))
            take(s, rep)
        elif s == "thm52":
            take(s, rl.thm52_check(H, x))
        elif s == "lemma61":
            if F is None:
                raise InputError("the lemma61 suite needs an F function")
            take(s, rl.lemma61_check(F))
    ok = all(r[-1] for r in rows)
    report = {"suites": names, "ok": ok, "flags": flags}
    return Result("verify", ["suite", "check", "x", "value", "bound", "pass"], rows, report,
                  status=EXIT_OK if ok else EXIT_SUITE)


def _xgrid(args):
    lo, hi, n = args.grid
    return np.linspace(lo, hi, n)


def _potential_rows(W, grid):
    V = W(grid)
    return [[x, v[0, 0], v[0, 1], v[1, 1]] for x, v in zip(grid, V)]


def cmd_convert(args) -> Result:
    spec = rio.load_spec(args.spec)
    op = args.op
    grid = _xgrid(args)
    pot_cols = ["x", "W11", "W12", "W22"]
    can_cols = ["x", "H11", "H12", "H22"]

    def can_rows(H):
        V = H(grid)
        return [[x, v[0, 0], v[0, 1], v[1, 1]] for x, v in zip(grid, V)]

    if op == "dirac-to-canonical":
        H = can.dirac_to_canonical(rio.potential_from_spec(spec), grid)
        return Result(op, can_cols, can_rows(H), extra={"spec": rio.canonical_to_spec(H, grid)})
    if op == "canonical-to-dirac":
        H = rio.canonical_from_spec(spec)
        W = can.canonical_to_dirac(H, grid=grid if H.kind != "sampled" else None)
        g = getattr(W, "grid", grid)
        return Result(op, pot_cols, _potential_rows(W, g), extra={"spec": rio.potential_to_spec(W, g)})
    if op == "offdiag":
        W = rio.potential_from_spec(spec)
        Wn, alpha = dirac.normalize_offdiag(W, (grid[0], grid[-1]) if W.lo == W.hi or
                                            not math.isfinite(W.hi) else None)
        rows = [r + [float(alpha.alpha(r[0]))] for r in _potential_rows(Wn, grid)]
        return Result(op, pot_cols + ["alpha"], rows, extra={"spec": rio.potential_to_spec(Wn, grid)})
    if op == "gauge":
        W = rio.potential_from_spec(spec)
        g = dirac.GaugeElement.constant(args.angle, args.shift)
        Wg = dirac.group_action(g, W)
        return Result(op, pot_cols, _potential_rows(Wg, grid), extra={"spec": rio.potential_to_spec(Wg, grid)})
    if op == "det-normalize":
        H = can.det_normalize(rio.canonical_from_spec(spec))
        return Result(op, can_cols, [[x, v[0, 0], v[0, 1], v[1, 1]] for x, v in zip(H.grid, H(H.grid))],
                      extra={"spec": rio.canonical_to_spec(H)})
    if op == "psl2":
        if args.matrix is None:
            raise InputError("psl2 needs --matrix a b c d")
        A = MoebiusMap(*args.matrix)
        H = can.psl2_action(A, rio.canonical_from_spec(spec))
        return Result(op, can_cols, can_rows(H))
    if op == "dirac-class":
        d = spec
        if "atoms" in d:
            g, F2 = can.normalize_to_dirac_class(HerglotzRep.from_dict(d))
            extra = {"spec": F2.to_dict()}
        elif "value" in d:
            val = complex(d["value"]["re"], d["value"]["im"]) if isinstance(d["value"], dict) else complex(d["value"])
            g, v2 = can.normalize_to_dirac_class(val)
            extra = {"value": v2}
        else:
            raise InputError("dirac-class takes a Herglotz record or {'value': F(i)}")
        M = g.matrix
        rows = [[M[0, 0].real, M[0, 1].real, M[1, 0].real, M[1, 1].real]]
        return Result(op, ["a", "b", "c", "d"], rows, extra=extra)
    raise UsageError(f"unknown conversion {op!r}")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="solver tolerance")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--report", default=None, help="write the run report (JSON) here")

    p = _Parser(prog="refless", description="Reflectionless Dirac operators and canonical systems.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("mfunc", parents=[common], help="m-functions on a z-grid")
    s.add_argument("spec")
    s.add_argument("--z", nargs="+", help="explicit points, e.g. 2j 1+0.5j")
    s.add_argument("--re", type=_range, help="lo:hi:n")
    s.add_argument("--im", type=_range, help="lo:hi:n")
    s.add_argument("--side", choices=("plus", "minus"), default="plus")
    s.set_defaults(func=cmd_mfunc)

    s = sub.add_parser("ffunc", parents=[common], help="F on a lambda-grid with a seam report")
    s.add_argument("spec")
    s.add_argument("--lam", nargs="+")
    s.add_argument("--re", type=_range)
    s.add_argument("--im", type=_range)
    s.set_defaults(func=cmd_ffunc)

    s = sub.add_parser("coeffs", parents=[common], help="f/g sequences and cascade tables")
    s.add_argument("spec")
    s.add_argument("--N", type=int, default=8)
    s.add_argument("--r", type=float, default=1.0)
    s.add_argument("--cascade", type=int, default=0, help="N_max of the derivative cascade (0: none)")
    s.set_defaults(func=cmd_coeffs)

    s = sub.add_parser("bounds", parents=[common], help="A/B bound tables")
    s.add_argument("--r", default="1", help="radius; rationals like 1/2 are exact")
    s.add_argument("--nmax", type=int, default=6)
    s.add_argument("--Nmax", type=int, default=5)
    s.add_argument("--exact", action="store_true", help="print rationals")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("reconstruct", parents=[common], help="potential from an F function")
    s.add_argument("spec")
    s.add_argument("--xmax", type=float, default=0.5)
    s.add_argument("--nmax", type=int, default=25)
    s.add_argument("--Nmax", type=int, default=24)
    s.add_argument("--rho", type=float, default=0.5)
    s.add_argument("--r", type=float, default=1.0)
    s.add_argument("--reseed-every", type=int, default=8)
    s.add_argument("--tail", choices=TAILS, default="series")
    s.add_argument("--no-validate", action="store_true")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("verify", parents=[common], help="property suites")
    s.add_argument("spec")
    s.add_argument("--suite", required=True, help=f"comma list of {', '.join(SUITES)} or 'all'")
    s.add_argument("--xmax", type=float, default=0.5)
    s.add_argument("--points", type=int, default=11)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("convert", parents=[common], help="conversions and group actions")
    s.add_argument("spec")
    s.add_argument("--op", required=True, choices=("dirac-to-canonical", "canonical-to-dirac", "offdiag",
                                                   "gauge", "det-normalize", "psl2", "dirac-class"))
    s.add_argument("--grid", type=_range, default=(0.0, 2.0, 201), help="lo:hi:n")
    s.add_argument("--angle", type=float, default=0.0)
    s.add_argument("--shift", type=float, default=0.0)
    s.add_argument("--matrix", type=float, nargs=4)
    s.set_defaults(func=cmd_convert)
    return p


def _emit(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _protect_negatives(argv: Sequence[str]) -> list:
    """Keep values like ``-1:1:3`` or ``-3+0.2j`` from being read as options."""
    return [" " + a if re.match(r"-[\d.]", a) else a for a in argv]


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = _protect_negatives(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("no command given")
        res = args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"refless: usage error: {exc}\n")
        return EXIT_USAGE
    except InputError as exc:
        sys.stderr.write(f"refless: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE
    except (ReflessError, ArithmeticError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"refless: numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    _emit(res.render(args.format), args.out)
    if res.report:
        if args.report is not None:
            _emit(rio.json_text(res.report), args.report)
        elif args.format == "csv":
            sys.stderr.write(rio.json_text(res.report))
    return res.status


if __name__ == "__main__":
    sys.exit(main())
