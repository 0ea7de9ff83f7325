import io
import json

import pytest

from erelax.cli import main
from erelax.csp import format_dimacs, planted_ksat


def run(argv):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


def report(text):
    data = json.loads(text)
    data.pop("timestamp", None)
    return data


@pytest.fixture
def clause_lp(tmp_path):
    p = tmp_path / "clause.lp"
    p.write_text("lp 3 1\n-1 : -1*x1 -1*x2 -1*x3\n")
    return str(p)


@pytest.fixture
def planted_cnf(tmp_path):
    inst, _ = planted_ksat(12, 51, 3, seed=31)
    p = tmp_path / "planted.cnf"
    p.write_text(format_dimacs(inst))
    return str(p)


def test_solve_feasible(clause_lp):
    code, out = run(["solve", "--lp", clause_lp, "--E", "0,1/3;2/3,1", "--seed", "7"])
    assert code == 0
    rep = report(out)
    assert rep["status"] == "solved" and rep["seed"] == 7
    assert set(rep) >= {"witness", "restarts_used", "steps_used", "T", "R", "restart_steps"}


def test_missing_E_is_usage(clause_lp, capsys):
    assert run(["solve", "--lp", clause_lp])[0] == 64
    assert "usage" in capsys.readouterr().err


def test_unknown_command_is_usage():
    assert run(["frobnicate"])[0] == 64
    assert run(["solve", "--lp", "x", "--E", "0,1", "--restarts", "many"])[0] == 64


def test_relaxation_infeasible(tmp_path):
    p = tmp_path / "bad.lp"
    p.write_text("lp 1 1\n-1 : x1\n")
    assert run(["solve", "--lp", str(p), "--E", "0,1/3;2/3,1"])[0] == 3


def test_exhausted(tmp_path):
    p = tmp_path / "half.lp"
    p.write_text("lp 1 2\n1 : 2*x1\n-1 : -2*x1\n")
    code, out = run(["solve", "--lp", str(p), "--E", "0,1/3;2/3,1", "--restarts", "2"])
    assert code == 2 and report(out)["status"] == "exhausted"


def test_input_errors(tmp_path):
    p = tmp_path / "broken.lp"
    p.write_text("lp 1 1\nnonsense\n")
    assert run(["solve", "--lp", str(p), "--E", "0,1/3;2/3,1"])[0] == 65
    assert run(["solve", "--lp", str(tmp_path / "missing.lp"), "--E", "0,1"])[0] == 65
    assert run(["analyze", "--E", "0,1/3;1/4,1"])[0] == 65


def test_restart_cap(tmp_path):
    p = tmp_path / "wide.lp"
    p.write_text("lp 60 0\n")
    assert run(["solve", "--lp", str(p), "--E", "0,1/3;2/3,1"])[0] == 64


def test_deterministic_reports(planted_cnf):
    a = run(["cnf", planted_cnf, "--k", "3", "--seed", "5", "--trace"])
    b = run(["cnf", planted_cnf, "--k", "3", "--seed", "5", "--trace"])
    assert a[0] == b[0] == 0
    assert report(a[1]) == report(b[1])
    assert report(a[1])["trajectory"]


def test_entropy_changes_seed(clause_lp):
    _, out = run(["solve", "--lp", clause_lp, "--E", "0,1/3;2/3,1", "--entropy"])
    assert "seed" in report(out)


def test_text_format(clause_lp):
    code, out = run(["solve", "--lp", clause_lp, "--E", "0,1/3;2/3,1", "--format", "text"])
    assert code == 0 and "status: solved" in out


def test_cnf_planted(planted_cnf):
    code, out = run(["cnf", planted_cnf, "--k", "3"])
    rep = report(out)
    assert code == 0 and len(rep["assignment"]) == 12


def test_cnf_errors(tmp_path):
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 3 1\n1 2 x 0\n")
    assert run(["cnf", str(bad), "--k", "3"])[0] == 65
    wide = tmp_path / "wide.cnf"
    wide.write_text("p cnf 4 1\n1 2 3 4 0\n")
    assert run(["cnf", str(wide), "--k", "3"])[0] == 65


def test_optimize_mode(tmp_path):
    p = tmp_path / "cap.lp"
    p.write_text("lp 1 1\n0 : x1\n")
    code, out = run(["solve", "--lp", str(p), "--E", "0,1/3;2/3,1", "--mode", "optimize", "--objective", "1"])
    rep = report(out)
    assert code == 0 and rep["value"] == rep["witness"][0]
    assert run(["solve", "--lp", str(p), "--E", "0,1", "--mode", "optimize"])[0] == 64


def test_analyze_e3():
    code, out = run(["analyze", "--E", "0,1/3;2/3,1", "--n", "5"])
    rep = report(out)
    assert code == 0
    assert (rep["beta"], rep["tau"], rep["gamma"], rep["T"]) == ("3/4", "2", "1/2", 171)
    assert rep["q_canonical"] == ["1/2", "1/2"]


def test_analyze_unit_and_five():
    rep = report(run(["analyze", "--E", "0,1"])[1])
    assert rep["beta"] == "1" and rep["tau"] is None and "note" in rep
    rep = report(run(["analyze", "--E", "0,1/5;2/5,3/5;4/5,1"])[1])
    assert rep["beta"] == "3/4"


def test_verify_suites():
    assert run(["verify", "--suite", "calc"])[0] == 0
    assert run(["verify", "--suite", "bogus"])[0] == 64
    code, out = run(["verify", "--suite", "strategy", "--n", "6", "--instances", "4"])
    assert code == 0 and json.loads(out)["suites"]["strategy"]["states"] > 0
