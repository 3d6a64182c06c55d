import json

import pytest
from click.testing import CliRunner

from qmhecke.cli import main, parse_form
from qmhecke.errors import OddWeight, ParseError
from qmhecke.forms import eisenstein
from qmhecke.quasimod import G2, QuasiModularForm


@pytest.fixture
def runner():
    return CliRunner()


def test_expand(runner):
    res = runner.invoke(main, ["expand", "G4", "--prec", "5"])
    assert res.exit_code == 0
    assert res.output.strip() == "1/240 + q + 9q^2 + 28q^3 + 73q^4"
    res = runner.invoke(main, ["expand", "DELTA", "--prec", "3"])
    assert res.output.strip() == "q - 24q^2"


def test_expand_quasimodular_expression(runner):
    # the constant terms 1/576 and 5/12 * 1/240 cancel
    res = runner.invoke(main, ["expand", "G2^2 - 5/12*G4", "--prec", "2"])
    assert res.exit_code == 0
    assert res.output.strip() == "-1/2q"


def test_expand_level_eisenstein(runner):
    res = runner.invoke(main, ["expand", "EISN(4,1,0,2)", "--prec", "2", "--level", "2"])
    assert res.exit_code == 0
    assert "q^(1/2)" in res.output


def test_expand_json(runner):
    res = runner.invoke(main, ["expand", "G6", "--prec", "3", "--json"])
    data = json.loads(res.output)
    assert data["terms"][0] == [0, "-1/504"]


def test_parse_form():
    assert parse_form("G2*G4 - 2*G6 + 0").equals(G2 * QuasiModularForm.modular(eisenstein(4)) - QuasiModularForm.modular(eisenstein(6)) * 2)
    with pytest.raises(OddWeight):
        parse_form("G3")
    for bad in ["FOO", "G4 /", "G4 / G6", "G4 ^ G2", "EISN(4, 1)"]:
        with pytest.raises(ParseError):
            parse_form(bad)


def test_usage_errors(runner):
    assert runner.invoke(main, ["expand", "G7"]).exit_code == 2
    assert runner.invoke(main, ["verify", "qm-structure", "--prec", "4"]).exit_code == 2
    assert runner.invoke(main, ["verify", "qm-structure", "--negative-control", "drop-delta-term"]).exit_code == 2
    assert runner.invoke(main, ["verify", "no-such-suite"]).exit_code == 2
    assert runner.invoke(main, ["hecke", "apply", "--op", "S5", "--form", "G4"]).exit_code == 2


def test_verify_report(runner, tmp_path):
    out = tmp_path / "r.json"
    res = runner.invoke(main, ["verify", "embedding", "--samples", "2", "--out", str(out)])
    assert res.exit_code == 0
    report = json.loads(out.read_text())
    assert report["status"] == "pass"
    assert report["config"]["seed"] == 0
    assert report["summary"]["checked"] == len(report["results"])
    assert {r["identity"] for r in report["results"]} >= {"T2*T3=index*T6", "tau-multiplicativity"}


def test_verify_is_deterministic(runner, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["verify", "star-assoc", "--samples", "2", "--seed", "3", "--level", "2"]
    assert runner.invoke(main, args + ["--out", str(a)]).exit_code == 0
    assert runner.invoke(main, args + ["--out", str(b), "--workers", "2"]).exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_negative_control_fails(runner, tmp_path):
    out = tmp_path / "neg.json"
    res = runner.invoke(main, ["verify", "hopf-H1", "--samples", "1", "--negative-control", "drop-delta-term", "--out", str(out)])
    assert res.exit_code == 1
    report = json.loads(out.read_text())
    failed = [r for r in report["results"] if r["status"] == "fail"]
    assert failed and all(r["identity"] == "hopf-action-star" for r in failed)


def test_hecke_apply(runner):
    res = runner.invoke(main, ["hecke", "apply", "--op", "T2", "--form", "DELTA", "--prec", "4"])
    assert res.exit_code == 0
    lines = res.output.strip().splitlines()
    assert lines[0] == "-3/4q + 18q^2 - 189q^3"
    assert lines[1] == "eigenvalue -3/4; classical normalisation n^(k/2-1) * eigenvalue = -24"


def test_hecke_apply_non_eigenform(runner):
    res = runner.invoke(main, ["hecke", "apply", "--op", "T2", "--form", "G4*G4*G4 + DELTA", "--prec", "3"])
    assert res.exit_code == 0
    assert "eigenvalue" not in res.output


def test_hecke_star_compare(runner):
    res = runner.invoke(main, ["hecke", "star", "--left", "T2", "--right", "T3", "--compare", "T6"])
    assert res.exit_code == 0
    assert res.output.strip().endswith("equal to T6: true")
    res = runner.invoke(main, ["hecke", "star", "--left", "T2", "--right", "T2", "--compare", "T4"])
    assert res.exit_code == 1


def test_file_inputs(runner, tmp_path):
    op_file = tmp_path / "op.json"
    assert runner.invoke(main, ["hecke", "star", "--left", "T2", "--right", "E", "--out", str(op_file)]).exit_code == 0
    form_file = tmp_path / "f.json"
    form_file.write_text(json.dumps(QuasiModularForm.modular(eisenstein(4)).to_json()))
    res = runner.invoke(main, ["hecke", "apply", "--op", f"@{op_file}", "--form", f"@{form_file}", "--prec", "2"])
    assert res.exit_code == 0
    assert "eigenvalue 9/2" in res.output
