import pytest

from corpus import mltl_corpus, real_corpus
from stltab.formula import FALSE, NO_PARENT, And, F, G, Temporal, atom, GT, parse, prop
from stltab.oracle import brute_force_check, evaluate
from stltab.tableau import (
    ACCEPT,
    CONTINUE,
    REJECT,
    TOGGLES,
    MemoStore,
    Options,
    TableauNode,
    adopt_orphans,
    check_termination,
    expand,
    is_poised,
    jump,
    memo_implies,
    select_advance,
    solve,
    split_easy,
    step,
)
from stltab.witness import reconstruct

x_pos = parse("x > 0")
p, q = prop("p"), prop("q")


def node(*fs, t=0):
    return TableauNode(list(fs), t)


def test_and_or_rules():
    (u,) = expand(node(And(p, q)))
    assert set(u.label) == {p, q} and u.rule == "AND"
    a, b = expand(node(parse("p | q")))
    assert a.label == (p,) and b.label == (q,)


def test_globally_rule_marks_and_decorates():
    (u,) = expand(node(G(1, 2, x_pos), t=1))
    assert x_pos in u.label
    assert G(1, 2, x_pos).replace(marked=True) in u.label


def test_eventually_rule_branches():
    f = F(0, 2, x_pos)
    now, later = expand(node(f))
    assert now.label == (x_pos,)
    assert later.label == (f.replace(marked=True),)


def test_nested_operator_is_shifted_and_decorated():
    f = G(0, 5, F(1, 2, p))
    (u,) = expand(node(f, t=3))
    assert F(4, 5, p).replace(parent=(0, 5)) in u.label
    (v,) = expand(node(f, t=3), Options(jump=False))
    assert F(4, 5, p) in v.label


def test_strict_until_and_release_rules():
    su = Temporal("SU", 1, 3, (p, q))
    now, later = expand(node(su, t=1))
    assert now.label == (q,)
    assert set(later.label) == {p, su.replace(marked=True)}
    sr = Temporal("SR", 1, 3, (p, q))
    rel, keep = expand(node(sr, t=1))
    assert set(rel.label) == {p, q}
    assert set(keep.label) == {q, sr.replace(marked=True)}


def test_poised():
    assert is_poised(node(G(2, 3, p), t=1))
    assert not is_poised(node(G(2, 3, p), t=2))
    assert is_poised(node(x_pos, G(0, 3, p).replace(marked=True)))
    with pytest.raises(ValueError):
        expand(node(x_pos))


def test_termination_rules():
    assert check_termination(node(FALSE))[0] == REJECT
    assert check_termination(node(x_pos, parse("x < 0")))[1] == "LOCALLY-UNSAT"
    assert check_termination(node(F(0, 2, p).replace(marked=True), t=2))[1] == "UNTIL"
    assert check_termination(node(x_pos)) == (ACCEPT, "EMPTY")
    assert check_termination(node(G(0, 2, p).replace(marked=True)))[0] == CONTINUE


def test_step_unmarks_and_drops_expired():
    g = G(0, 2, p).replace(marked=True)
    u = step(node(x_pos, g, F(4, 5, q)))
    assert u.time == 1 and set(u.label) == {G(0, 2, p), F(4, 5, q)}
    assert step(node(g, t=2)).label == ()


def test_jump_skips_to_next_bound():
    u = node(x_pos, G(0, 10, x_pos).replace(marked=True), F(0, 11, parse("x < 0")).replace(marked=True))
    assert select_advance(u) == "JUMP"
    v = jump(u)
    assert v.time == 10 and v.rule == "JUMP"
    assert set(v.label) == {G(0, 10, x_pos), F(0, 11, parse("x < 0"))}


def test_jump_shifts_periodic_operators():
    g = G(0, 10, F(0, 3, p)).replace(marked=True)
    derived = F(0, 3, p).replace(parent=(0, 10)).replace(marked=True)
    u = node(g, derived)
    assert select_advance(u) == "STEP"  # the derived F lasts beyond t
    w = node(g.replace(lo=0), F(3, 6, p).replace(parent=(0, 10)).replace(marked=True), t=3)
    assert select_advance(w) == "JUMP"
    v = jump(w)
    assert v.time == 10
    assert F(10, 13, p).replace(parent=(0, 10)) in v.label


def test_adopt_orphans():
    derived = G(5, 8, p).replace(parent=(0, 10))
    assert adopt_orphans((derived,), 5) == (G(5, 8, p),)
    gen = G(0, 10, G(0, 3, p)).replace(marked=True)
    label = (gen, derived)
    assert adopt_orphans(label, 5) == label
    once = F(0, 10, G(0, 3, p)).replace(marked=True)
    assert adopt_orphans((once, derived), 5) == (once, G(5, 8, p))


def test_memo_relations():
    store = MemoStore()
    store.add(node(G(2, 5, p), F(3, 6, q), t=1))
    assert memo_implies(node(G(1, 5, p), F(2, 4, q)), store)
    assert memo_implies(node(G(3, 7, p), F(4, 6, q), x_pos, t=2), store)
    assert not memo_implies(node(G(2, 4, p), F(3, 6, q), t=1), store)
    assert not memo_implies(node(G(2, 5, p), t=1), store)
    store.add(node(Temporal("SU", 1, 4, (p, q)), t=0))
    assert memo_implies(node(Temporal("SU", 1, 3, (p, q))), store)
    assert not memo_implies(node(Temporal("SU", 0, 3, (p, q))), store)


def test_split_easy_node():
    u = node(G(0, 4, F(0, 1, p)), G(1, 3, q).replace(parent=(0, 4)))
    easy, full = split_easy(u)
    assert easy.label == (G(1, 3, q),) and full is u
    assert split_easy(node(G(0, 2, p))) is None


def test_worked_examples():
    for text in ("G[1,2] x > 0", "F[0,2] x < 5", "G[0,10] x > 5 & F[0,11] x < 0"):
        f = parse(text)
        v = solve(f)
        assert v.sat
        w = reconstruct(v.branch, f).extended(v.horizon + 1)
        assert evaluate(f, w)
    v = solve(parse("G[0,10] x > 5 & F[0,11] x < 0"))
    assert v.stats.jumps == 1 and v.stats.max_jump == 10


def test_unsat_examples():
    assert solve(parse("G[0,3] p & F[1,2] !p")).status == "unsat"
    assert solve(parse("F[0,2] (x > 1 & x < 1)")).status == "unsat"


def test_orphaned_derived_operator_regression():
    f = parse("F[0,10] G[0,3] p & G[50,100] !p")
    for opts in (Options(), Options().without("easy_first")):
        v = solve(f, opts)
        assert v.sat
        assert evaluate(f, reconstruct(v.branch, f).extended(v.horizon + 1))


def test_timeout_is_reported():
    v = solve(parse("G[0,2000] F[0,40] p & G[0,2000] F[0,37] !p"), Options(timeout_seconds=0.01))
    assert v.status in ("timeout", "sat")


@pytest.mark.parametrize("toggle", [None, *TOGGLES])
def test_configs_agree_with_oracle(toggle):
    opts = Options(timeout_seconds=5)
    if toggle:
        opts = opts.without(toggle)
    for f in mltl_corpus(40, seed=99) + real_corpus(20, seed=98):
        v = solve(f, opts)
        if v.status == "timeout":
            continue
        assert v.status == brute_force_check(f).status, f
        assert v.stats.horizon_violations == 0
        if v.sat:
            assert evaluate(f, reconstruct(v.branch, f).extended(v.horizon + 1)), f


def test_trace_collects_nodes():
    v = solve(parse("F[0,2] x < 5"), Options(trace=True))
    assert v.trace and v.trace[0][0].time == 0
    assert Options().fingerprint() == "all"
    assert Options().without("jump").without("memoization").fingerprint() == "no-jump+no-memoization"


def test_instance_discharged_at_jump_instant_regression():
    f = parse("F[3,8] (!p R[0,1] !p) & G[3,8] (!p U[2,2] q) & F[1,5] !r")
    v = solve(f)
    assert v.sat
    assert evaluate(f, reconstruct(v.branch, f).extended(v.horizon + 1))
