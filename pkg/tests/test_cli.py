import csv
import io
import json

from conftest import BENCH
from stltab.cli import EXIT_SAT, EXIT_TIMEOUT, EXIT_UNSAT, EXIT_USAGE, main, split_requirements
from stltab.formula import parse
from stltab.oracle import evaluate
from stltab.witness import Signal
from fractions import Fraction

EXTRA = BENCH / "extra"


def test_split_requirements():
    text = "# header\nG[0,1] (x > 0 &\n   y > 0)\n\nF[0,2] z > 1  # trailing\n"
    assert split_requirements(text) == [(2, "G[0,1] (x > 0 &\n   y > 0)"), (5, "F[0,2] z > 1  ")]


def test_check_sat_and_unsat(capsys):
    assert main(["check", str(EXTRA / "always_positive.stl")]) == EXIT_SAT
    assert capsys.readouterr().out.strip() == "sat"
    assert main(["check", str(EXTRA / "railroad_pair.stl")]) == EXIT_UNSAT
    assert capsys.readouterr().out.strip() == "unsat"


def test_witness_files(tmp_path):
    f = parse((EXTRA / "jump_example.stl").read_text())
    out = tmp_path / "w.csv"
    assert main(["check", str(EXTRA / "jump_example.stl"), "--witness", str(out)]) == EXIT_SAT
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["time", "x"]
    sig = Signal(len(rows) - 1, [{"x": Fraction(r[1])} for r in rows[1:]])
    assert evaluate(f, sig)
    js = tmp_path / "w.json"
    assert main(["check", str(EXTRA / "jump_example.stl"), "--witness", str(js)]) == EXIT_SAT
    data = json.loads(js.read_text())
    assert data["vars"] == ["x"] and data["length"] == 12


def test_trace_dot(tmp_path):
    out = tmp_path / "t.dot"
    assert main(["check", str(EXTRA / "eventually_below.stl"), "--trace", str(out)]) == EXIT_SAT
    text = out.read_text()
    assert text.startswith("digraph tableau") and "->" in text


def test_toggles_and_timeout(tmp_path, capsys):
    path = str(EXTRA / "jump_example.stl")
    assert main(["check", path, "--no-jump", "--no-memo", "--no-easy-first"]) == EXIT_SAT
    hard = tmp_path / "hard.stl"
    hard.write_text("G[0,3000] F[0,50] p & G[0,3000] F[0,47] !p & F[0,3000] (q & !q | G[0,5] r & F[0,5] !r)\n")
    assert main(["check", str(hard), "--timeout", "0.01", "--no-memo"]) in (EXIT_TIMEOUT, EXIT_UNSAT)


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.stl"
    bad.write_text("G[0,1] x > 0\nF[3,1] y > 0\n")
    assert main(["check", str(bad)]) == EXIT_USAGE
    assert f"{bad}:2:2:" in capsys.readouterr().err


def test_mltl_format_rejects_reals(tmp_path):
    f = tmp_path / "r.mltl"
    f.write_text("G[0,1] x > 0.5\n")
    assert main(["check", str(f), "--format", "mltl"]) == EXIT_USAGE
    f.write_text("G[0,1] (p -> F[0,1] q)\n")
    assert main(["check", str(f), "--format", "mltl"]) == EXIT_SAT


def test_bench_csv(tmp_path):
    d = tmp_path / "b"
    d.mkdir()
    (d / "one.stl").write_text("G[1,2] x > 0\n")
    (d / "two.stl").write_text("G[0,2] p & F[1,2] !p\n")
    out = tmp_path / "o.csv"
    assert main(["bench", str(d), "--ablate", "-o", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 2 * 10
    assert {r["result"] for r in rows if r["name"] == "one"} == {"sat"}
    assert {r["result"] for r in rows if r["name"] == "two"} == {"unsat"}
    assert rows[0]["options"] == "all" and rows[1]["options"].startswith("no-")


def test_emit_smt(capsys):
    assert main(["emit-smt", str(EXTRA / "smt_example.stl")]) == 0
    assert "(assert (and (or (>= a_2 80) (>= a_3 80)) (or (>= a_3 80) (>= a_4 80))))" in capsys.readouterr().out


def test_oracle_command(capsys):
    assert main(["oracle", str(EXTRA / "eventually_below.stl")]) == EXIT_SAT
    assert main(["oracle", str(EXTRA / "railroad_pair.stl")]) == EXIT_USAGE
    assert "oracle cap" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["check", "/nonexistent.stl"]) == EXIT_USAGE
