import csv
import io
import json
import subprocess
import sys

import pytest

from dtpasp.cli import (EXIT_OK, EXIT_PARSE, EXIT_RESOURCE, EXIT_SEMANTIC, main, parse_params,
                        parse_report, parse_tiers, render_report, report_to_dict)
from dtpasp.dtsolve import solve
from dtpasp.errors import ParseError
from dtpasp.lang import parse

CYCLIC = "0.5::f. decision d. a :- b. b :- a. a :- f, d. utility(a, 3).\n"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out.strip(), out.err


def test_query_bounds(capsys, data_dir):
    assert run(capsys, "query", data_dir / "ex2.lp", "--query", "qr") == (
        EXIT_OK, "lower=0.3 upper=0.58 inc=0", "")
    code, out, _ = run(capsys, "query", data_dir / "ex3.lp", "-q", "qr")
    assert out == "lower=0.18 upper=0.46 inc=0.12"


def test_query_negated_literal(capsys, data_dir):
    _, out, _ = run(capsys, "query", data_dir / "ex3.lp", "-q", "not qr")
    assert out == "lower=0.42 upper=0.7 inc=0.12"


def test_query_json(capsys, data_dir):
    code, out, _ = run(capsys, "query", data_dir / "ex2.lp", "-q", "qr", "--format", "json")
    d = json.loads(out)
    assert d["lower"] == pytest.approx(0.3) and d["upper"] == pytest.approx(0.58)


def test_exit_codes(capsys, data_dir, tmp_path):
    assert run(capsys, "query", data_dir / "ex2.lp", "-q", "zz")[0] == EXIT_SEMANTIC
    assert run(capsys, "query", tmp_path / "missing.lp", "-q", "qr")[0] == EXIT_PARSE
    bad = tmp_path / "bad.lp"
    bad.write_text("a :- .\n")
    assert run(capsys, "solve", bad)[0] == EXIT_PARSE
    unsafe = tmp_path / "unsafe.lp"
    unsafe.write_text("p(X) :- not q(X). q(1).\n")
    assert run(capsys, "solve", unsafe)[0] == EXIT_SEMANTIC


def test_solve_running_example(capsys, data_dir):
    for method in ("enum", "amc3", "auto"):
        code, out, _ = run(capsys, "solve", data_dir / "ex5.lp", "--method", method)
        assert code == EXIT_OK
        assert out.splitlines() == ["lower: {da} 0.6", "upper: {da,db} 1.16"]


def test_solve_shopping(capsys, data_dir):
    _, out, _ = run(capsys, "solve", data_dir / "ex6.lp")
    assert out.splitlines() == ["lower: {target(bob)} 1.5",
                                "upper: {target(anna),target(bob)} 4.3"]


def test_solve_without_decisions(capsys, data_dir):
    code, out, _ = run(capsys, "solve", data_dir / "ex2.lp", "--per-strategy")
    assert code == EXIT_OK
    assert out.splitlines() == ["{} [0, 0]", "lower: {} 0", "upper: {} 0"]


def test_structured_report_round_trips(capsys, data_dir):
    code, out, _ = run(capsys, "solve", data_dir / "ex5.lp", "--method", "enum",
                       "--per-strategy", "--format", "json")
    rep = parse_report(out)
    assert report_to_dict(rep) == json.loads(out)
    direct = solve(parse((data_dir / "ex5.lp").read_text()))
    assert rep.best_lower == direct.best_lower and rep.best_upper == direct.best_upper
    assert parse_report(render_report(rep, "json", per_strategy=True)) == rep


def test_td_on_running_cnf(capsys, data_dir, tmp_path):
    out_td = tmp_path / "crun.td"
    code, out, _ = run(capsys, "td", data_dir / "crun.cnf",
                       "--tiers", "outer=1-4;middle=5-7;inner=8-9", "--out-td", out_td)
    assert code == EXIT_OK
    assert out.splitlines()[0].startswith("width=2 valid=yes")
    assert out_td.read_text().startswith("s td ")
    _, out, _ = run(capsys, "td", data_dir / "crun.cnf", "--tiers",
                    "outer=1-4;middle=5-7;inner=8-9", "--definability", "none")
    assert out.startswith("width=4 valid=yes")


def test_bench_row_count(capsys, tmp_path):
    out = tmp_path / "t1.csv"
    code, _, _ = run(capsys, "bench", "--suite", "t1", "--params", "n=2,d=1..8",
                     "--method", "enum", "--out", out)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 8
    assert [int(r["d"]) for r in rows] == list(range(1, 9))


def test_bench_to_stdout_with_two_methods(capsys):
    code, out, _ = run(capsys, "bench", "--suite", "t3", "--params", "size=1..2",
                       "--method", "enum,amc3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == EXIT_OK and len(rows) == 4


def test_compile_falls_back_on_cyclic_program(capsys, tmp_path):
    p = tmp_path / "cyc.lp"
    p.write_text(CYCLIC)
    code, out, _ = run(capsys, "compile", p)
    assert code == EXIT_OK
    assert "fall" in out.lower()
    assert run(capsys, "compile", p, "--method", "amc3")[0] == EXIT_SEMANTIC


def test_compile_dumps_circuit(capsys, data_dir, tmp_path):
    nnf = tmp_path / "c.nnf"
    code, out, _ = run(capsys, "compile", data_dir / "ex5.lp", "--dump-nnf", nnf)
    assert code == EXIT_OK
    assert nnf.read_text().splitlines()[-1].startswith("root ")
    code, out, _ = run(capsys, "compile", data_dir / "crun.cnf")
    assert code == EXIT_OK


def test_env_atom_cap(capsys, data_dir, monkeypatch):
    monkeypatch.setenv("DTPASP_MAX_ATOMS", "2")
    assert run(capsys, "solve", data_dir / "ex5.lp", "--method", "enum")[0] == EXIT_RESOURCE
    monkeypatch.setenv("DTPASP_MAX_ATOMS", "lots")
    assert run(capsys, "solve", data_dir / "ex5.lp")[0] == EXIT_PARSE


def test_parse_helpers():
    assert parse_params("n=2,d=1..3", "t1") == [(2, 1), (2, 2), (2, 3)]
    assert parse_params("size=2..3", "t5") == [(2, 2), (3, 3)]
    with pytest.raises(ParseError):
        parse_params("n=2", "t1")
    assert parse_tiers("outer=1-2;middle=3", range(1, 6)) == ({1, 2}, {3}, {4, 5})
    with pytest.raises(ParseError):
        parse_tiers("outer=9", range(1, 6))


def test_module_entry_point(data_dir):
    res = subprocess.run([sys.executable, "-m", "dtpasp", "query", str(data_dir / "ex2.lp"),
                          "-q", "qr"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == "lower=0.3 upper=0.58 inc=0"
