import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crnhopf import bimolecular as bm
from crnhopf import library
from crnhopf.cli import resolve_network, run
from crnhopf.focal import NORMALIZATION
from crnhopf.report import format_float, rational_repr, render_json, render_report, render_text


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_bundled_network(capsys):
    code, out, _ = call(capsys, "analyze", "net5_g2", "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["deficiency"] == 1 and rep["massConserving"] and rep["stronglyConnected"]["overall"]


def test_analyze_file_path(tmp_path, capsys):
    p = tmp_path / "lotka.crn"
    p.write_text("species X, Y\nX + Y -> 2Y ; k=1\nX -> 2X ; k=1\nY -> 0 ; k=1\n")
    code, out, _ = call(capsys, "analyze", str(p))
    assert code == 0 and "deficiency: 1" in out


def test_output_is_deterministic(capsys):
    first = call(capsys, "hopf", "net5_g1", "--json")[1]
    second = call(capsys, "hopf", "net5_g1", "--json")[1]
    assert first == second
    doc = json.loads(first)
    assert doc["normalization"] == NORMALIZATION
    assert doc["hopfPoints"][0]["criticality"] == "supercritical"


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "net5_g2", "--bogus"],
        ["frobnicate"],
        ["analyze", "/nonexistent/file.crn"],
        ["continue", "net5_g2", "--range", "5:1"],
        ["hopf", "net6_g2", "--scan-ab", "--grid", "3by3"],
        ["cycle", "fks", "--tol", "0"],
        ["verify", "--criteria", "99"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert call(capsys, *argv)[0] == 2


def test_analysis_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.crn"
    bad.write_text("species X\nX -> 2X ; k=0\n")
    code, _, err = call(capsys, "analyze", str(bad))
    assert code == 1 and "line 2" in err
    assert call(capsys, "continue", "lotka", "--range", "1:2")[0] == 1
    assert call(capsys, "hopf", "net5_g2", "--scan-ab")[0] == 1


def test_classify_texts(capsys):
    code, out, _ = call(capsys, "classify", "fks")
    assert code == 0 and out.startswith("not applicable: bimolecular fails")
    code, out, _ = call(capsys, "classify", "lotka_constant_z", "--json")
    doc = json.loads(out)
    assert doc["kind"] == "ReducedThenClassified"
    assert doc["conditionsOnClassLevel"][0]["solved"] == "Z < 2"
    assert doc["otherwise"]["kind"] == "NoPeriodicOrbit"


def test_only_declared_outputs_are_written(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    out = tmp_path / "out"
    assert call(capsys, "cycle", "fks", "--out", str(out))[0] == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["out"]
    assert sorted(p.name for p in out.iterdir()) == ["cycle.csv", "cycle.json"]
    doc = json.loads((out / "cycle.json").read_text())
    assert doc["stability"] == "stable" and abs(doc["multiplier"]) < 1


def test_continue_writes_branch_and_script(tmp_path, capsys):
    out = tmp_path / "c"
    code, text, _ = call(capsys, "continue", "net5_g2", "--param", "class", "--range", "2:4", "--level", "3",
                         "--out", str(out), "--gnuplot", "--json")
    assert code == 0
    doc = json.loads(text)
    assert doc["parameter"] == "c" and doc["points"] > 3
    assert {"branch.csv", "branch.gp", "branch.json", "continue.json"} <= {p.name for p in out.iterdir()}


def test_scan_ab_grid_and_locus(tmp_path, capsys):
    code, out, _ = call(capsys, "hopf", "net8", "--scan-ab", "--grid", "2x2", "--out", str(tmp_path), "--gnuplot")
    assert code == 0 and out.splitlines()[0] == "a,b,t1,signL1_1,t2,signL1_2" and len(out.splitlines()) == 5
    assert (tmp_path / "signmap.csv").read_text() == out and (tmp_path / "signmap.gp").exists()
    code, out, _ = call(capsys, "hopf", "net6_g2", "--scan-ab", "--grid", "3x8", "--json")
    doc = json.loads(out)
    assert doc["mode"] == "hopf-locus" and len(doc["rows"]) == 3


def test_verify_subset(capsys):
    code, out, _ = call(capsys, "verify", "--criteria", "1,2")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 2 and all(l.startswith("[PASS]") for l in lines)


def test_list_and_resolution(capsys):
    code, out, _ = call(capsys, "list")
    assert code == 0 and "net8" in out.split()
    assert resolve_network("net8") == resolve_network("net8.crn")


def test_seeded_suites_are_reproducible():
    a = [bm.random_bimolecular_network(np.random.default_rng(7)) for _ in range(3)]
    b = [bm.random_bimolecular_network(np.random.default_rng(7)) for _ in range(3)]
    assert a == b


@given(st.fractions(max_denominator=10**6))
def test_rational_repr(q):
    r = rational_repr(q)
    assert (r == q.numerator) if q.denominator == 1 else (r == f"{q.numerator}/{q.denominator}")


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_formatting_15_digits(x):
    y = format_float(x)
    assert y == float(f"{x:.15g}")
    assert json.loads(render_json({"x": x}))["x"] == y


def test_render_report_determinism_and_notes():
    data = {"b": Fraction(1, 3), "a": [1.0 / 3, np.float64(2.5)], "focalValues": [Fraction(-1, 2)]}
    t1, j1 = render_report(data)
    t2, j2 = render_report(dict(reversed(list(data.items()))))
    assert (t1, j1) == (t2, j2)
    assert json.loads(j1)["normalization"] == NORMALIZATION
    assert list(json.loads(j1)) == sorted(json.loads(j1))


def test_not_applicable_rendering():
    v = bm.classify_rank2_bimolecular(library.frank_kamenetsky_salnikov())
    assert render_text(v).splitlines()[0] == "not applicable: bimolecular fails (complex 3X has molecularity 3 > 2)"
