from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from bvtoolkit import SCHEMA, __version__
from bvtoolkit.cli import run, write_atomic


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), stdout=buf)
    return code, buf.getvalue()


def report(*argv):
    code, out = call(*argv)
    assert code == 0, out
    return json.loads(out)


def test_analyze_sin():
    rep = report("analyze", "sin")
    assert rep["schema"] == SCHEMA == "bv-toolkit/1"
    assert rep["version"] == __version__
    assert rep["command"] == "analyze"
    res = rep["result"]
    assert res["total_variation"] == 4.0
    assert res["classification"] == "AbsolutelyContinuous"
    assert res["refinement"]["verdict"] == "Converged"
    assert res["positive_variation"] == res["negative_variation"] == 2.0
    assert rep["config"]["input"] == "sin"


def test_analyze_x_sin_inv_bound():
    rep = report("analyze", "x_sin_inv", "--bound", "10")
    assert rep["result"]["refinement"]["verdict"] == "ExceededBound"
    assert rep["result"]["classification"] == "NotBV"
    assert rep["result"]["total_variation"] == "inf"
    code, _ = call("analyze", "x_sin_inv", "--bound", "10", "--require-bv")
    assert code == 2


def test_analyze_blackbox_and_params():
    rep = report("analyze", "dini", "--depth", "12")
    assert rep["result"]["classification"] in ("Undetermined", "NotBV")
    rep = report("analyze", "spikes", "--param", "c=0.5", "--param", "K=20")
    assert rep["result"]["total_variation"] == pytest.approx(2 * (1 - 2.0 ** -20), abs=1e-15)


def test_indicatrix_sin():
    rep = report("indicatrix", "sin", "--depth", "12")
    ints = [r["integral"] for r in rep["result"]["integrals"]]
    assert [r["n"] for r in rep["result"]["integrals"]] == list(range(1, 13))
    assert ints == sorted(ints)
    assert rep["result"]["final_integral"] == pytest.approx(4.0, abs=1e-3)


def test_decompose_and_mollify_and_stieltjes():
    rep = report("decompose", "cantor")
    assert rep["result"]["classification"] == "SingularPartPresent"
    rep = report("decompose", "heaviside", "--param", "c=0.25")
    assert rep["result"]["s_f"]["jumps"][0]["x"] == 0.25
    rep = report("mollify", "sin", "--h-schedule", "0.2,0.1,0.05")
    assert [r["h"] for r in rep["result"]["rows"]] == [0.2, 0.1, 0.05]
    code, out = call("stieltjes", "cos", "heaviside", "--param", "b=1",
                     "--g-param", "c=0.3")
    assert code == 0 and float(out) == pytest.approx(math.cos(0.3), abs=1e-15)


def test_helly_and_essential(tmp_path):
    rep = report("helly", "xn_family", "--count", "64", "--grid", "33")
    res = rep["result"]
    assert res["limit"][-1] == 1.0 and res["extrapolated"][-1] == 1.0
    assert max(abs(v) for v in res["extrapolated"][:-1]) < 1e-12
    assert res["K"] == 1.0
    samples = [0.0, 1.0, 2.0, 50.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]
    path = tmp_path / "cg.json"
    path.write_text(json.dumps({"samples": samples, "corrupt": [3]}))
    res = report("essential", str(path))["result"]
    assert res["restricted_variation"] == 9.0
    assert 3 in res["phi"]["corrupt"] and res["phi"]["value"] == 9.0
    assert res["plain_variation"] == 1 + 1 + 48 + 46 + 5
    assert res["estimate"] == 9.0
    res = report("essential", "sin", "--grid", "512")["result"]
    assert res["phi"]["value"] == pytest.approx(4.0, abs=1e-3)
    assert res["estimate"] == pytest.approx(4.0, abs=1e-3)


@pytest.mark.parametrize("argv", [
    ["analyze", "no_such_function"],
    ["frobnicate", "sin"],
    ["analyze", "sin", "--depth", "0"],
    ["analyze", "sin", "--tol", "-1"],
    ["analyze", "sin", "--param", "zz=1"],
    ["analyze", "sin", "--param", "novalue"],
    ["mollify", "heaviside"],
    ["mollify", "sin", "--h-schedule", "0.1,x"],
    ["stieltjes", "cos", "heaviside"],
    ["helly", "sin", "--count", "1"],
    ["analyze"],
])
def test_input_errors_exit_1(argv, capsys):
    code, out = call(*argv)
    assert code == 1
    assert out == ""
    assert "bv-toolkit" in capsys.readouterr().err


def test_not_bv_exit_codes():
    assert call("decompose", "x_sin_inv")[0] == 1
    assert call("decompose", "x_sin_inv", "--require-bv")[0] == 2
    # the exact representation already knows T = inf; keep the dyadic sweep short
    assert call("analyze", "x_sin_inv", "--depth", "14")[0] == 0
    assert call("analyze", "x_sin_inv", "--depth", "14", "--require-bv")[0] == 2


def test_spec_file_input(tmp_path):
    spec = {"piecewise": [{"on": [0, 1], "expr": {"poly": [0, 2]}},
                          {"on": [1, 2], "expr": {"poly": [0.5]}}]}
    path = tmp_path / "f.json"
    path.write_text(json.dumps(spec))
    res = report("analyze", str(path))["result"]
    assert res["total_variation"] == pytest.approx(2.0 + 1.5)
    assert res["classification"] == "SingularPartPresent"  # the jump at 1
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert call("analyze", str(bad))[0] == 1
    assert call("analyze", str(path), "--param", "c=1")[0] == 1


def test_out_directory_and_csv(tmp_path):
    out = tmp_path / "run"
    code, stdout = call("indicatrix", "sin", "--depth", "6", "--grid", "64", "--out", str(out))
    assert code == 0 and stdout == ""
    names = sorted(p.name for p in out.iterdir())
    assert names == ["indicatrix.json", "indicatrix_indicatrix.csv",
                     "indicatrix_integrals.csv"]
    rows = list(csv.reader((out / "indicatrix_indicatrix.csv").open()))
    assert rows[0] == ["y", "N", "cN", "chi_n"] and len(rows) == 66
    rows = list(csv.reader((out / "indicatrix_integrals.csv").open()))
    assert rows[0] == ["n", "integral"] and len(rows) == 7
    rep = json.loads((out / "indicatrix.json").read_text())
    assert "out" not in rep["config"] and rep["config"]["depth"] == 6
    assert not [p for p in out.iterdir() if p.name.endswith(".tmp")]


@pytest.mark.parametrize("command,header", [
    (["analyze", "sin"], ["x", "f"]),
    (["decompose", "cantor"], ["x", "f"]),
    (["mollify", "sin", "--h-schedule", "0.1,0.05"], ["h", "variation"]),
    (["helly", "sin_n", "--count", "8"], ["x", "f", "extrapolated"]),
    (["essential", "sin", "--grid", "64"], ["x", "f"]),
])
def test_csv_headers(command, header):
    code, out = call(*command, "--format", "csv")
    assert code == 0
    assert next(csv.reader(io.StringIO(out))) == header


def test_reports_are_byte_identical(tmp_path):
    for argv in (["analyze", "cantor"], ["indicatrix", "sin", "--depth", "8"],
                 ["helly", "xn_family", "--count", "16"], ["essential", "sin", "--grid", "128"]):
        a, b = tmp_path / "a", tmp_path / "b"
        assert call(*argv, "--out", str(a))[0] == 0
        assert call(*argv, "--out", str(b))[0] == 0
        for p in a.iterdir():
            assert p.read_bytes() == (b / p.name).read_bytes()
        for d in (a, b):
            for p in d.iterdir():
                p.unlink()


def test_write_atomic_replaces_and_cleans_up(tmp_path):
    target = tmp_path / "x" / "r.json"
    write_atomic(target, "one")
    write_atomic(target, "two")
    assert target.read_text() == "two"
    assert [p.name for p in target.parent.iterdir()] == ["r.json"]


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert call("analyze", "sin", "--out", str(blocker / "sub"))[0] == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bvtoolkit", "stieltjes", "linear", "linear"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and float(proc.stdout) == pytest.approx(0.5)
    proc = subprocess.run([sys.executable, "-m", "bvtoolkit", "--version"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and __version__ in proc.stdout
