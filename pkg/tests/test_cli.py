import json
import math
import subprocess
import sys

import numpy as np
import pytest

from refless import constant_m
from refless.cli import main
from refless.io import read_csv

W_BETA = {"repr": "constant", "gauge": "trace_zero",
          "matrix": [[math.sin(0.7), math.cos(0.7)], [math.cos(0.7), -math.sin(0.7)]]}
ZERO = {"repr": "constant", "matrix": [[0, 0], [0, 0]]}
F_NEG_INV = {"shift": 0, "atoms": [{"t": 0, "w": 1}]}
BUMP = {"repr": "sampled", "gauge": "trace_zero", "grid": [-1.0, 0.0, 1.0], "extend": "constant",
        "values": [W_BETA["matrix"], [[0.2, 0.3], [0.3, -0.2]], W_BETA["matrix"]]}
TWO_ATOM = {"rotations": [[0.3, 0.4], [2.0, 0.6]]}


@pytest.fixture
def spec(tmp_path):
    def make(d, name="spec.json"):
        p = tmp_path / name
        p.write_text(json.dumps(d))
        return str(p)
    return make


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def table(out):
    kind, cols, data = read_csv(out)
    return kind, dict(zip(cols, data.T))


# mfunc ------------------------------------------------------------------------------


def test_mfunc_zero_is_i(capsys, spec):
    code, out, _ = run(capsys, "mfunc", spec(ZERO), "--re", "-1:1:3", "--im", "0.5:2:3")
    assert code == 0
    kind, t = table(out)
    assert kind == "mfunc_plus"
    assert np.allclose(t["re_m"], 0, atol=1e-12) and np.allclose(t["im_m"], 1, atol=1e-12)


def test_mfunc_beta_matches_constant_m(capsys, spec):
    code, out, _ = run(capsys, "mfunc", spec(W_BETA), "--z", "2j", "0.5+1j", "-3+0.2j")
    assert code == 0
    _, t = table(out)
    z = t["re_z"] + 1j * t["im_z"]
    ref = constant_m(np.array(W_BETA["matrix"]), z)[0]
    assert np.max(np.abs(t["re_m"] + 1j * t["im_m"] - ref)) < 1e-8


def test_mfunc_bad_spec(capsys, spec):
    assert run(capsys, "mfunc", spec({"repr": "constant"}))[0] == 1
    assert run(capsys, "mfunc", "{broken")[0] == 1
    assert run(capsys, "mfunc")[0] == 1
    assert run(capsys)[0] == 1


def test_mfunc_lower_half_plane_is_input_error(capsys, spec):
    assert run(capsys, "mfunc", spec(W_BETA), "--z", "1-1j")[0] == 1


# ffunc --------------------------------------------------------------------------------


def test_ffunc_lambda_flat(capsys, spec):
    code, out, err = run(capsys, "ffunc", spec({"repr": "extreme", "theta": 0.0}),
                         "--lam", "0.5j", "0.3+0.2j", "--format", "json")
    assert code == 0
    body = json.loads(out)
    for row in body["rows"]:
        lam = complex(row[0], row[1])
        assert abs(complex(row[2], row[3]) - lam) < 1e-6
    assert not body["report"]["seam_flagged"]


def test_ffunc_combination_at_i(capsys, spec):
    code, out, _ = run(capsys, "ffunc", spec(TWO_ATOM), "--lam", "0.5j", "--format", "json")
    rep = json.loads(out)["report"]
    assert code == 0
    assert abs(complex(rep["F_at_i"]["re"], rep["F_at_i"]["im"]) - 1j) < 1e-12


def test_ffunc_flags_seam(capsys, spec):
    code, out, _ = run(capsys, "ffunc", spec(BUMP), "--lam", "0.5j", "--format", "json")
    assert code == 0
    assert json.loads(out)["report"]["seam_flagged"]


# coeffs / bounds ------------------------------------------------------------------------


def test_coeffs_neg_inverse(capsys, spec):
    code, out, _ = run(capsys, "coeffs", spec(F_NEG_INV), "--N", "4", "--format", "json")
    assert code == 0
    body = json.loads(out)
    cols = body["columns"]
    g = {r[cols.index("n")]: complex(r[cols.index("re")], r[cols.index("im")])
         for r in body["rows"] if r[cols.index("chart")] == "w_chart"}
    assert abs(g[1] - 1) < 1e-12 and abs(g[2] + 0.5j) < 1e-12 and abs(g[4] + 0.125j) < 1e-12
    ratios = [r[cols.index("ratio")] for r in body["rows"]]
    assert max(ratios) <= 1


def test_coeffs_cascade(capsys, spec):
    code, out, _ = run(capsys, "coeffs", spec(TWO_ATOM), "--N", "8", "--cascade", "6", "--format", "json")
    assert code == 0
    body = json.loads(out)
    ratio = body["columns"].index("ratio")
    assert max(r[ratio] for r in body["rows"]) <= 1


def test_bounds_exact(capsys):
    code, out, err = run(capsys, "bounds", "--r", "1", "--nmax", "4", "--Nmax", "3", "--exact", "--format", "json")
    assert code == 0
    body = json.loads(out)
    cols = body["columns"]
    rows = {(r[0], r[1]): r for r in body["rows"]}
    assert rows[(1, 1)][cols.index("B")] == "45"
    assert rows[(2, 1)][cols.index("B")] == "270"
    assert body["report"]["B_equals_C"]


def test_bounds_csv_report_to_stderr(capsys, tmp_path):
    rep = tmp_path / "rep.json"
    code, out, err = run(capsys, "bounds", "--r", "1/2", "--nmax", "3", "--Nmax", "2")
    assert code == 0 and json.loads(err)["B_equals_C"]
    code, out, err = run(capsys, "bounds", "--nmax", "3", "--Nmax", "2", "--report", rep)
    assert err == "" and json.loads(rep.read_text())["B_equals_C"]


def test_bounds_bad_depth(capsys):
    assert run(capsys, "bounds", "--nmax", "2", "--Nmax", "4")[0] == 1


def test_coeffs_radius_too_large_is_numeric(capsys, spec):
    assert run(capsys, "coeffs", spec(TWO_ATOM), "--r", "2.5")[0] == 2


# reconstruct ----------------------------------------------------------------------------


def test_reconstruct_neg_inverse(capsys, spec, tmp_path):
    out_path = tmp_path / "w.csv"
    code, _, err = run(capsys, "reconstruct", spec(F_NEG_INV), "--out", out_path)
    assert code == 0
    _, t = table(out_path.read_text())
    assert np.max(np.abs(t["q"] - 1)) < 1e-4 and np.max(np.abs(t["p"])) < 1e-4
    rep = json.loads(err)
    assert rep["steps"] == 15 and rep["validation_residual"] < 1e-4


def test_reconstruct_not_dirac_class(capsys, spec):
    assert run(capsys, "reconstruct", spec({"shift": 0, "atoms": [{"t": "inf", "w": 2}]}))[0] == 1


# verify ---------------------------------------------------------------------------------


def test_verify_beta_all(capsys, spec):
    code, out, _ = run(capsys, "verify", spec(W_BETA), "--suite", "all", "--format", "json")
    assert code == 0
    rep = json.loads(out)["report"]
    assert rep["ok"] and rep["flags"]["thm41.equality"] and rep["flags"]["thm52.equality"]


def test_verify_bump_fails(capsys, spec):
    assert run(capsys, "verify", spec(BUMP), "--suite", "refless")[0] == 3


def test_verify_combination(capsys, spec):
    code, *_ = run(capsys, "verify", spec(TWO_ATOM), "--suite", "thm41,thm42,lemma61")
    assert code == 0


def test_verify_bad_suite(capsys, spec):
    assert run(capsys, "verify", spec(W_BETA), "--suite", "")[0] == 1
    assert run(capsys, "verify", spec(W_BETA), "--suite", "nonsense")[0] == 1


# convert --------------------------------------------------------------------------------


def test_convert_roundtrip(capsys, spec, tmp_path):
    can = tmp_path / "can.json"
    code, _, _ = run(capsys, "convert", spec(W_BETA), "--op", "dirac-to-canonical", "--grid", "0:2:201",
                     "--format", "json", "--out", can)
    assert code == 0
    body = json.loads(can.read_text())
    code, out, _ = run(capsys, "convert", json.dumps(body["spec"]), "--op", "canonical-to-dirac")
    assert code == 0
    _, t = table(out)
    code, out2, _ = run(capsys, "convert", spec(W_BETA), "--op", "offdiag", "--grid", "0:2:201")
    _, ref = table(out2)
    for k in ("W11", "W12", "W22"):
        assert np.max(np.abs(t[k] - ref[k])) < 1e-7


def test_convert_degenerate_errors(capsys, spec):
    deg = {"repr": "degenerate", "alpha": 0.3}
    assert run(capsys, "convert", spec(deg), "--op", "canonical-to-dirac")[0] == 1
    assert run(capsys, "convert", spec({"shift": 0.7, "atoms": []}), "--op", "dirac-class")[0] == 1


def test_convert_psl2(capsys, spec):
    H = {"repr": "constant", "normalization": "det_one", "matrix": [[1, 0], [0, 1]]}
    code, out, _ = run(capsys, "convert", spec(H), "--op", "psl2", "--matrix", "2", "0", "0", "0.5",
                       "--grid", "0:1:3")
    assert code == 0
    _, t = table(out)
    assert np.allclose(t["H11"], 0.25) and np.allclose(t["H22"], 4)


def test_convert_dirac_class(capsys, spec):
    code, out, _ = run(capsys, "convert", spec({"shift": 1, "atoms": [{"t": "inf", "w": 2}]}),
                       "--op", "dirac-class", "--format", "json")
    assert code == 0
    body = json.loads(out)
    a, b, c, d = body["rows"][0]
    assert c == 0 and abs(a / d - 0.5) < 1e-15 and abs(b / d + 0.5) < 1e-15
    F = body["spec"]
    assert abs(F["shift"]) < 1e-15 and F["atoms"] == [{"t": "inf", "w": 1.0}]


# contract -------------------------------------------------------------------------------


def test_output_is_deterministic(spec, tmp_path):
    outs = []
    for k in range(2):
        p = tmp_path / f"o{k}.csv"
        assert main(["reconstruct", spec(TWO_ATOM), "--xmax", "0.2", "--out", str(p),
                     "--report", str(tmp_path / f"r{k}.json")]) == 0
        outs.append(p.read_bytes() + (tmp_path / f"r{k}.json").read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point(spec):
    proc = subprocess.run([sys.executable, "-m", "refless", "bounds", "--nmax", "2", "--Nmax", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("# refless-csv/1 bounds")
