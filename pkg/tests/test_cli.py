from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from qbirkhoff.cli import CSV_COLUMNS, run

from conftest import SYSTEMS


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    rc = run(list(map(str, argv)), stdout=out, stderr=err)
    return rc, out.getvalue(), err.getvalue()


def test_solve_reports_theta_values():
    rc, out, _ = _run("solve", SYSTEMS / "theta.json", "--z", "0.5+0.1j")
    assert rc == 0
    rep = json.loads(out)
    assert rep["command"] == "solve" and rep["version"] == 1
    assert all(r["pass"] for r in rep["residuals"])


def test_connection_ellipticity_passes():
    rc, out, _ = _run("connection", SYSTEMS / "qpvi_generic.json", "--samples", "20")
    assert rc == 0
    res = {r["invariant"]: r for r in json.loads(out)["residuals"]}
    assert any("ellipticity" in k for k in res)
    assert all(r["pass"] for r in res.values())


def test_qpvi_verify_negative_control_reports_large_residuals():
    rc, out, _ = _run("qpvi-verify", SYSTEMS / "qpvi_generic.json", "--negative-control")
    assert rc == 0
    rep = json.loads(out)
    corrupted = [r for r in rep["residuals"] if r["invariant"].startswith("q_from_p_corrupted_")]
    assert corrupted and all(r["value"] > 1e-2 for r in corrupted)


@pytest.mark.parametrize("name,hyp", [
    ("guard_resonant", "modulo q^Z"),
    ("guard_pole_at_zero", "Fuchsian"),
    ("guard_r0_ratio", "r0(qt)"),
])
def test_guards_exit_3_with_named_hypothesis(name, hyp):
    cmd = "connection" if name == "guard_r0_ratio" else "solve"
    rc, _, err = _run(cmd, SYSTEMS / f"{name}.json")
    assert rc == 3
    assert "hypothesis violated [" in err and hyp in err


def test_bad_input_exit_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"version": 2}))
    assert _run("solve", p)[0] == 2


def test_confluence_writes_csv(tmp_path):
    out = tmp_path / "rep.json"
    rc, _, _ = _run("confluence", SYSTEMS / "confluence_trivial.json", "-o", out)
    assert rc == 0
    rows = list(csv.reader((tmp_path / "rep.json.csv").open()))
    assert tuple(rows[0]) == tuple(CSV_COLUMNS)
    assert {r[4] for r in rows[1:]} <= {"increment", "ode_distance", "failure"}


def test_output_is_deterministic(tmp_path):
    a = _run("qpvi-verify", SYSTEMS / "qpvi_degenerate.json")[1]
    b = _run("qpvi-verify", SYSTEMS / "qpvi_degenerate.json")[1]
    assert a == b


def test_console_entry_point():
    r = subprocess.run(
        [sys.executable, "-m", "qbirkhoff.cli", "solve", str(SYSTEMS / "theta.json")],
        capture_output=True, text=True,
    )
    assert r.returncode == 0, r.stderr
    assert json.loads(r.stdout)["command"] == "solve"
