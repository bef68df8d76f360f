import re
from fractions import Fraction

import pytest

from conftest import BENCH
from stltab.cli import read_requirements
from stltab.formula import parse
from stltab.smt_export import emit_smtlib, smt_number, smt_symbol
from stltab.tableau import solve

EXAMPLE = "(assert (and (or (>= a_2 80) (>= a_3 80)) (or (>= a_3 80) (>= a_4 80))))"


def test_numbers_and_symbols():
    assert smt_number(Fraction(-3, 4)) == "(- (/ 3 4))"
    assert smt_number(Fraction(7)) == "7"
    assert smt_symbol("a", 3) == "a_3"
    assert smt_symbol("a-b", 0) == "|a-b_0|"


def test_example_assertion():
    text = emit_smtlib(parse("G[2,3] F[0,1] a >= 80"))
    assert EXAMPLE in text.splitlines()
    assert text.startswith("(set-logic QF_LRA)")
    assert text.rstrip().endswith("(check-sat)")
    assert len(re.findall(r"declare-const a_\d+ Real", text)) == 5


def test_strict_and_negated_atoms():
    text = emit_smtlib(parse("x < 2*y & x != 1"))
    assert "(> (+ (* (- 1) x_0) (* 2 y_0)) 0)" in text or "(> (+ (* 2 y_0) (* (- 1) x_0)) 0)" in text
    assert "(not (= x_0 1))" in text


def _z3_verdict(text):
    z3 = pytest.importorskip("z3")
    s = z3.Solver()
    s.from_string(text)
    return str(s.check())


def test_z3_agrees_on_benchmarks():
    pytest.importorskip("z3")
    for path in sorted((BENCH / "stl").glob("*.stl")):
        f = read_requirements(path)
        assert _z3_verdict(emit_smtlib(f)) == solve(f).status, path.name
