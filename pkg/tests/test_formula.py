import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from corpus import mltl_corpus, random_mltl
from stltab.formula import (
    EQ,
    FALSE,
    GE,
    GT,
    NO_PARENT,
    TRUE,
    And,
    Atom,
    F,
    G,
    Implies,
    LinearConstraint,
    Not,
    Or,
    ParseError,
    R,
    Temporal,
    U,
    atom,
    format_formula,
    horizon,
    parse,
    pcl,
    prop,
    temporal_closure,
    temporal_expansion,
    to_strict_normal_form,
)
from stltab.oracle import brute_force_check, evaluate
from stltab.witness import Signal


def test_parse_precedence():
    f = parse("a & b | c -> d")
    assert f == Implies(Or(And(prop("a"), prop("b")), prop("c")), prop("d"))


def test_parse_binary_temporal_binds_tighter_than_and():
    f = parse("a U[0,2] b & c")
    assert f == And(U(0, 2, prop("a"), prop("b")), prop("c"))


def test_parse_normalises_less_than():
    assert parse("x < 5") == atom({"x": -1}, GT, -5)
    assert parse("x <= 2*y + 1") == atom({"x": -1, "y": 2}, GE, -1)


def test_parse_rationals_and_decimals():
    assert parse("x >= 1/3") == atom({"x": 1}, GE, Fraction(1, 3))
    assert parse("x > 0.25") == atom({"x": 1}, GT, Fraction(1, 4))


def test_ground_comparisons_fold():
    assert parse("x - x > 0") == FALSE
    assert parse("1 >= 0") == TRUE


def test_parse_errors_have_positions():
    with pytest.raises(ParseError) as e:
        parse("G[1,0] x > 0")
    assert (e.value.line, e.value.column) == (1, 2)
    with pytest.raises(ParseError):
        parse("x * y > 0")
    with pytest.raises(ParseError):
        parse("(x > 0")


def test_format_example():
    assert format_formula(parse("G[1,2] x > 0")) == "G[1,2] (x > 0)"


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10_000))
def test_format_parse_round_trip(seed):
    import random

    f = random_mltl(random.Random(seed), depth=2, size=6)
    assert parse(format_formula(f)) == f


def test_horizon_examples():
    assert horizon(parse("x > 0")) == 0
    assert horizon(parse("G[2,3] F[0,1] (a >= 80)")) == 4
    assert horizon(parse("G[3,50] F[5,20] a & G[10,60] (a -> G[20,40] !a)")) == 100
    assert horizon(parse("(a U[1,4] b) | F[0,2] c")) == 4


def test_pcl_one_level():
    f = parse("G[0,1] a & F[0,2] b")
    assert pcl(f) == {f.left, f.right}
    g = parse("F[0,1] a")
    assert pcl(g) == {g}


def test_temporal_closure_goes_through_connectives():
    f = parse("a | (F[0,1] b & !G[2,3] c)")
    assert {t.op for t in temporal_closure(f)} == {"F", "G"}


def test_temporal_expansion_shifts_outermost_only():
    f = parse("F[0,1] G[2,3] p")
    g = temporal_expansion(f, 4, (0, 10))
    assert (g.lo, g.hi, g.parent) == (4, 5, (0, 10))
    assert g.args[0] == f.args[0]
    assert temporal_expansion(f, 0) == f


def _snf_ops(f, acc):
    match f:
        case Temporal(op=op, args=args):
            acc.add(op)
            for a in args:
                _snf_ops(a, acc)
        case Not(arg=a):
            acc.add("not-" + type(a).__name__)
            _snf_ops(a, acc)
        case And(left=l, right=r) | Or(left=l, right=r) | Implies(left=l, right=r):
            acc.add(type(f).__name__)
            _snf_ops(l, acc)
            _snf_ops(r, acc)
        case Atom(constraint=c):
            acc.add(c.rel)
    return acc


def test_snf_shape():
    f = parse("!(a U[1,3] b) | (c R[0,2] !(x != 3)) | !F[0,2] (y > 1) | (p -> q)")
    ops = _snf_ops(to_strict_normal_form(f, keep_gf=False), set())
    assert ops <= {"SU", "SR", "And", "Or", "not-TrueF", GT, GE, EQ}
    ops = _snf_ops(to_strict_normal_form(f, keep_gf=True, keep_implies=True), set())
    assert "Implies" in ops and "G" in ops


def test_snf_until_example():
    f = to_strict_normal_form(parse("a U[2,5] b"), keep_gf=True)
    a, b = prop("a"), prop("b")
    assert f == And(G(0, 2, a), Temporal("SU", 2, 5, (a, And(a, b))))


def test_snf_negated_equality_splits():
    f = to_strict_normal_form(parse("!(x == 3)"))
    assert f == Or(atom({"x": 1}, GT, 3), atom({"x": -1}, GT, -3))


def _equivalent_on_all_signals(f, g, names):
    h = max(horizon(f), horizon(g))
    cells = len(names) * (h + 1)
    for bits in itertools.product((0, 1), repeat=cells):
        rows = [{f"x_{n}": Fraction(bits[t * len(names) + i]) for i, n in enumerate(names)} for t in range(h + 1)]
        w = Signal(h + 1, rows)
        if evaluate(f, w) != evaluate(g, w):
            return False
    return True


@pytest.mark.parametrize("a,b", [(0, 0), (0, 2), (1, 3), (2, 2)])
def test_until_and_release_rewrites_are_equivalences(a, b):
    p, q = prop("p"), prop("q")
    for f in (U(a, b, p, q), R(a, b, p, q), Not(U(a, b, p, q)), Not(R(a, b, p, q))):
        for keep_gf in (True, False):
            assert _equivalent_on_all_signals(f, to_strict_normal_form(f, keep_gf=keep_gf), ["p", "q"])


def test_snf_preserves_oracle_verdict_on_random_corpus():
    for f in mltl_corpus(500, seed=21):
        expect = brute_force_check(f).status
        assert brute_force_check(to_strict_normal_form(f, keep_gf=False)).status == expect
        assert brute_force_check(to_strict_normal_form(f, keep_gf=True, keep_implies=True)).status == expect


def test_constraint_rejects_unknown_relation():
    with pytest.raises(ValueError):
        LinearConstraint({"x": 1}, "<", 0)


def test_temporal_defaults():
    g = G(0, 3, prop("a"))
    assert g.parent == NO_PARENT and not g.marked
    with pytest.raises(ValueError):
        Temporal("G", 3, 1, (TRUE,))
