import csv
import io
import json
import subprocess
import sys

import pytest

from ghlab.cli import main, render_report, run
from ghlab.problem import load_spec, parse_spec


def test_csv_three_shells(problems_dir):
    rep = run("check-system", load_spec(problems_dir / "rational_pair.yaml"), lambda_max=4)
    text = render_report(rep, "csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["lambda", "sigma_min", "witness", "ratio"]
    assert [r[0] for r in rows[1:]] == ["1", "2", "4"]
    assert text.endswith("\n")


def test_json_round_trip_and_determinism(problems_dir):
    pf = load_spec(problems_dir / "single_field.yaml")
    a = render_report(run("check-system", pf, lambda_max=200), "json")
    b = render_report(run("check-system", pf, lambda_max=200), "json")
    assert a == b
    data = json.loads(a)
    assert json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n" == a
    assert data["results"]["gh"]["verdict"] == "FailZeroSymbol"
    assert data["version"] and "wall" not in a


def test_exit_codes(tmp_path, problems_dir, monkeypatch):
    out = tmp_path / "r.json"
    assert main(["check-system", "--spec", str(problems_dir / "rational_pair.yaml"),
                 "--lambda-max", "50", "--out", str(out)]) == 0
    assert out.read_bytes().endswith(b"\n")
    bad = tmp_path / "bad.yaml"
    bad.write_text("group: {kind: so3}\nsystem: [[1]]\n")
    out2 = tmp_path / "r2.json"
    assert main(["check-system", "--spec", str(bad), "--out", str(out2)]) == 2
    assert not out2.exists()
    assert main(["check-system", "--spec", str(tmp_path / "missing.yaml")]) == 2
    # a decimal literal cannot deliver 12 partial quotients
    dec = tmp_path / "dec.yaml"
    dec.write_text("seed: 0\ngroup: {kind: torus, dim: 2}\nsystem: [[1, {decimal: '3.14159'}]]\n"
                   "analysis: {cf_depth: 12, radius: 20}\n")
    out3 = tmp_path / "r3.json"
    assert main(["diophantine", "--spec", str(dec), "--out", str(out3)]) == 3
    assert not out3.exists()
    monkeypatch.setenv("GHLAB_THREADS", "zero")
    assert main(["check-system", "--spec", str(problems_dir / "rational_pair.yaml")]) == 2


def test_seed_required_for_probes(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text("group: {kind: torus, dim: 1}\noperator: {Q: laplacian, fields: [{a: [1], W: [1]}]}\n")
    assert main(["inequalities", "--spec", str(p)]) == 2


def test_console_script_entry(problems_dir):
    r = subprocess.run([sys.executable, "-m", "ghlab.cli", "check-system", "--spec",
                        str(problems_dir / "su2_x3.yaml"), "--lambda-max", "12", "--format", "csv"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("lambda,sigma_min,witness,ratio\n")
