"""The batch front end on the shipped problem files.

Each report is plain JSON with sorted keys and no timing data, so reruns
produce identical bytes.
"""
import json
from pathlib import Path

from ghlab.cli import render_report, run
from ghlab.problem import load_spec

problems = Path(__file__).resolve().parents[1] / "problems"
for cmd, name, kw in [("check-system", "rational_pair", {"lambda_max": 2000}),
                      ("check-system", "su2_x3", {"lambda_max": 30}),
                      ("counterexample", "single_field", {"lambda_max": 2000}),
                      ("diophantine", "golden", {"radius": 200})]:
    report = run(cmd, load_spec(problems / f"{name}.yaml"), **kw)
    text = render_report(report, "json")
    again = render_report(run(cmd, load_spec(problems / f"{name}.yaml"), **kw), "json")
    res = json.loads(text)["results"]
    summary = res["gh"]["verdict"] if "gh" in res else res["equivalence"]["direction"]
    print(f"{cmd:15s} {name:14s} {summary:20s} identical rerun: {text == again}")
