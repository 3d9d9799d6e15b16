"""JSON input specs and deterministic CSV/JSON output.

Potential spec::

    {"gauge": "trace_zero" | "offdiag_zero" | "general",
     "repr": "constant" | "sampled" | "extreme",
     "matrix": [[w11, w12], [w12, w22]],         # constant
     "grid": [...], "values": [[[..]], ...],     # sampled
     "extend": "constant",                       # sampled, optional
     "theta": 0.7}                               # extreme

A sampled potential lives on its grid; ``"extend": "constant"`` continues
it by its end values to the whole line.

Canonical spec: the same with ``"H_values"`` (and optionally
``"H_derivatives"``) instead of ``"values"``, ``"repr": "degenerate"``
with ``"alpha"``, and a mandatory ``"normalization"``.

F spec: a Herglotz record ``{"shift": a, "atoms": [{"t": t | "inf", "w": w}]}``,
rotation atoms ``{"rotations": [[theta, w], ...]}``, or
``{"potential": <potential spec>}`` for the numeric path.
"""

from __future__ import annotations

import io as _io
import json
from pathlib import Path
from typing import Iterable, Sequence, TextIO, Union

import numpy as np

from .canonical import NORMALIZATIONS, CanonicalSystem
from .dirac import ConstantPotential, DiracPotential, SampledPotential
from .errors import InputError
from .herglotz import HerglotzRep
from .reflectionless import FFunction, convex_combination, extreme_potential

CSV_VERSION = "refless-csv/1"


def load_spec(source: Union[str, Path, dict]) -> dict:
    """A dict from a dict, a JSON file path, or JSON text."""
    if isinstance(source, dict):
        return source
    text = str(source)
    try:
        if not text.lstrip().startswith("{"):
            text = Path(text).read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read spec: {exc}") from exc


def _get(d: dict, key: str):
    if key not in d:
        raise InputError(f"spec is missing {key!r}")
    return d[key]


def potential_from_spec(spec) -> DiracPotential:
    d = load_spec(spec)
    kind = d.get("repr", "constant")
    if kind == "extreme":
        return extreme_potential(float(_get(d, "theta")))
    if kind == "constant":
        W = ConstantPotential(np.asarray(_get(d, "matrix"), dtype=float), d.get("gauge"))
    elif kind == "sampled":
        grid = np.asarray(_get(d, "grid"), dtype=float)
        values = np.asarray(_get(d, "values"), dtype=float)
        tails = {}
        ext = d.get("extend")
        if ext == "constant":
            tails = dict(left_const=(grid[0], values[0]), right_const=(grid[-1], values[-1]))
        elif ext is not None:
            raise InputError(f"unknown extension {ext!r}")
        W = SampledPotential(grid, values, d.get("gauge", "general"), **tails)
    else:
        raise InputError(f"unknown potential repr {kind!r}")
    gauge = d.get("gauge")
    if gauge is not None and gauge != "general":
        x = W.grid if kind == "sampled" else None
        if not W.check_gauge(x):
            raise InputError(f"values violate the {gauge} gauge")
    return W


def potential_to_spec(W: DiracPotential, grid=None) -> dict:
    if isinstance(W, ConstantPotential):
        return {"repr": "constant", "gauge": W.gauge, "matrix": W.matrix.tolist()}
    if grid is None:
        grid = getattr(W, "grid", None)
    if grid is None:
        raise InputError("a grid is needed to serialize this potential")
    grid = np.asarray(grid, dtype=float)
    return {"repr": "sampled", "gauge": W.gauge, "grid": grid.tolist(), "values": W(grid).tolist()}


def canonical_from_spec(spec) -> CanonicalSystem:
    d = load_spec(spec)
    kind = d.get("repr", "constant")
    if kind == "degenerate":
        return CanonicalSystem.degenerate(float(_get(d, "alpha")))
    norm = _get(d, "normalization")
    if norm not in NORMALIZATIONS:
        raise InputError(f"normalization must be one of {NORMALIZATIONS}")
    if kind == "constant":
        return CanonicalSystem.constant(np.asarray(_get(d, "matrix"), dtype=float), norm)
    if kind == "sampled":
        der = d.get("H_derivatives")
        return CanonicalSystem.sampled(_get(d, "grid"), np.asarray(_get(d, "H_values"), dtype=float),
                                       None if der is None else np.asarray(der, dtype=float), norm)
    raise InputError(f"unknown canonical repr {kind!r}")


def canonical_to_spec(H: CanonicalSystem, grid=None) -> dict:
    if grid is None:
        grid = getattr(H, "grid", None)
    if grid is None:
        raise InputError("a grid is needed to serialize this canonical system")
    grid = np.asarray(grid, dtype=float)
    return {"repr": "sampled", "normalization": H.normalization, "grid": grid.tolist(),
            "H_values": H(grid).tolist(), "H_derivatives": H.derivative(grid).tolist()}


def F_from_spec(spec) -> FFunction:
    d = load_spec(spec)
    if "potential" in d:
        return FFunction.from_potential(potential_from_spec(d["potential"]))
    if "rotations" in d:
        return convex_combination([(float(t), float(w)) for t, w in d["rotations"]])
    if "atoms" in d:
        return FFunction.analytic(HerglotzRep.from_dict(d))
    raise InputError("F spec needs 'atoms', 'rotations' or 'potential'")


def spec_kind(spec) -> str:
    """``"canonical"``, ``"F"`` or ``"potential"``."""
    d = load_spec(spec)
    if "normalization" in d or d.get("repr") == "degenerate":
        return "canonical"
    if any(k in d for k in ("atoms", "rotations", "potential")):
        return "F"
    return "potential"


# ---------------------------------------------------------------------------
# output


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(out: TextIO, kind: str, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Versioned header, column names, then rows with 17 significant digits."""
    out.write(f"# {CSV_VERSION} {kind}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")


def csv_text(kind: str, columns, rows) -> str:
    buf = _io.StringIO()
    write_csv(buf, kind, columns, rows)
    return buf.getvalue()


def read_csv(text: str) -> tuple[str, list, np.ndarray]:
    """Inverse of :func:`write_csv` for numeric tables: ``(kind, columns, data)``."""
    lines = text.strip().splitlines()
    head = lines[0].split()
    if len(head) < 2 or head[1] != CSV_VERSION:
        raise InputError("not a refless CSV file")
    cols = lines[1].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]], dtype=float)
    return head[2] if len(head) > 2 else "", cols, data.reshape(-1, len(cols))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    return obj


def json_text(obj) -> str:
    """Deterministic JSON; floats use the shortest round-trip repr."""
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"
