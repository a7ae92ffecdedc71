from fractions import Fraction

import pytest

from ghlab.diophantine import QuadraticSurd
from ghlab.problem import SpecError, load_spec, parse_spec


def _base(**kw):
    d = {"name": "t", "seed": 0, "group": {"kind": "torus", "dim": 2}, "T": {"dim": 1},
         "system": [["1", "1/2"]]}
    d.update(kw)
    return d


def test_all_shipped_problems_parse(problems_dir):
    files = sorted(problems_dir.glob("*.yaml"))
    assert len(files) >= 7
    for f in files:
        load_spec(f)


def test_valid_torus_spec():
    pf = parse_spec(_base())
    assert pf.family is not None and pf.family.rational
    assert pf.system.maps[0].constant_value().coords == (1, Fraction(1, 2))


def test_golden_entry_builds_irrational_family():
    pf = parse_spec(_base(system=[["1", {"golden": None}]]))
    assert pf.family.blocks[0].vectors[0][0] == QuadraticSurd.golden()
    assert not pf.system.maps[0].exact


@pytest.mark.parametrize("data, message", [
    (_base(group={"kind": "so3"}), "unknown group kind"),
    (_base(group={"kind": "torus", "dim": 0}), "group.dim"),
    (_base(system=[["1"]]), "dimension mismatch"),
    (_base(system=[[{"1": 1}, "0"]]), "conjugate-symmetric"),
    (_base(system=[[{"1,0": 1, "-1,0": 1}, "0"]]), "dimension mismatch"),
    (_base(system=[["0", "0"]]), "vanishes"),
    (_base(extra=1), "unknown top-level"),
    (_base(analysis={"theta": 1}), "theta"),
    (_base(system=None), "need a 'system' or an 'operator'"),
])
def test_schema_violations(data, message):
    with pytest.raises(SpecError, match=message):
        parse_spec(data)


def test_skew_symmetry_diagnostic():
    data = _base(system=None, operator={
        "Q": "laplacian",
        "fields": [{"a": ["1", "0"], "W": [{"1": "1/2", "-1": "1/2"}]}],
    })
    with pytest.raises(SpecError, match="skew-symmetry"):
        parse_spec(data)


def test_operator_section():
    data = _base(system=None, operator={
        "Q": {"form": [[2]]},
        "fields": [{"a": [{"0": 1, "1": "1/2", "-1": "1/2"}, "1/3"], "W": ["1/2"]}],
    })
    pf = parse_spec(data)
    assert pf.operator.exact and len(pf.operator.fields) == 1
    assert pf.system is not None


def test_bad_yaml(tmp_path):
    p = tmp_path / "x.yaml"
    p.write_text("group: [unclosed\n")
    with pytest.raises(SpecError):
        load_spec(p)
