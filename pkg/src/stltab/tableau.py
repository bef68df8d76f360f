"""One-pass tree-shaped tableau with the STEP and JUMP advance rules."""

from __future__ import annotations

import itertools
import time as _time
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Iterable

from . import heuristics
from .formula import (
    FALSE,
    NO_PARENT,
    And,
    Atom,
    Formula,
    Implies,
    Not,
    Or,
    Temporal,
    TrueF,
    horizon,
    temporal_closure,
    temporal_expansion,
    to_strict_normal_form,
)
from .lra import LraResult, check_consistent

TOGGLES = (
    "jump",
    "gf_rules",
    "implication_rule",
    "gf_unrolling",
    "merge_redundant",
    "interval_shift",
    "early_check",
    "memoization",
    "easy_first",
)


@dataclass(frozen=True)
class Options:
    jump: bool = True
    gf_rules: bool = True
    implication_rule: bool = True
    gf_unrolling: bool = True
    merge_redundant: bool = True
    interval_shift: bool = True
    early_check: bool = True
    memoization: bool = True
    easy_first: bool = True
    timeout_seconds: float | None = 120.0
    trace: bool = False

    def without(self, toggle: str) -> Options:
        return replace(self, **{toggle: False})

    def fingerprint(self) -> str:
        off = [t for t in TOGGLES if not getattr(self, t)]
        return "all" if not off else "+".join("no-" + t.replace("_", "-") for t in off)


@dataclass
class Stats:
    nodes: int = 0
    poised: int = 0
    steps: int = 0
    jumps: int = 0
    max_jump: int = 0
    memo_hits: int = 0
    lra_calls: int = 0
    max_time: int = 0
    horizon_violations: int = 0

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


class TableauNode:
    __slots__ = ("label", "time", "parent", "rule", "id")

    _ids = itertools.count()

    def __init__(self, label: Iterable[Formula], time: int, parent: TableauNode | None = None, rule: str = "ROOT"):
        self.label = tuple(dict.fromkeys(label))
        self.time = time
        self.parent = parent
        self.rule = rule
        self.id = next(TableauNode._ids)

    def __repr__(self):
        body = ", ".join(_show(f) for f in self.label)
        return f"{{{body}}}@{self.time}"

    def atoms(self) -> frozenset:
        return frozenset(f.constraint for f in self.label if isinstance(f, Atom))

    def temporals(self) -> list[Temporal]:
        return [f for f in self.label if isinstance(f, Temporal)]


def _show(f: Formula) -> str:
    from .formula import format_formula

    return format_formula(f, decorations=True)


@dataclass
class Verdict:
    status: str  # "sat" | "unsat" | "timeout"
    branch: list[TableauNode] | None
    stats: Stats
    formula: Formula | None = None
    horizon: int = 0
    trace: list | None = field(default=None, repr=False)

    @property
    def sat(self) -> bool:
        return self.status == "sat"


# ---------------------------------------------------------------- node classification


def _in(t: int, interval) -> bool:
    return interval[0] <= t <= interval[1]


def _expandable(f: Formula, t: int) -> bool:
    match f:
        case And() | Or() | Implies():
            return True
        case Temporal(marked=False, lo=lo, hi=hi):
            return lo <= t <= hi
        case Not(arg=TrueF()):
            return False
        case Not():
            return True
    return False


def is_poised(u: TableauNode) -> bool:
    return not any(_expandable(f, u.time) for f in u.label)


def _pick(u: TableauNode):
    """First category-P formula, else first applicable temporal rule."""
    t = u.time
    for f in u.label:
        if isinstance(f, (And, Or, Implies, Not)) and _expandable(f, t):
            return f
    for f in u.label:
        if isinstance(f, Temporal) and _expandable(f, t):
            return f
    return None


# ---------------------------------------------------------------- expansion


def _child(u: TableauNode, f: Formula, additions, opts: Options, rule: str) -> TableauNode:
    d = dict.fromkeys(u.label)
    del d[f]
    for a in additions:
        d.setdefault(a)
    label = tuple(d)
    if opts.merge_redundant:
        label = _drop_satisfied(heuristics.merge_redundant(label), u.time, opts.jump)
    return TableauNode(label, u.time, u, rule)


def _drop_satisfied(label: tuple, t: int, jump_mode: bool) -> tuple:
    """Remove active F/sU whose goal argument is already in the label.

    Satisfying such an operator now adds nothing, so that child's label is a
    subset of the postponing one.
    """
    present = None
    out = []
    for f in label:
        if isinstance(f, Temporal) and f.op in ("F", "SU") and f.lo <= t <= f.hi:
            if present is None:
                present = set(label)
            goal = f.args[-1]
            par = (f.lo, f.hi) if jump_mode else None
            if temporal_expansion(goal, t, par) in present:
                continue
        out.append(f)
    return label if len(out) == len(label) else tuple(out)


def expand(u: TableauNode, opts: Options = Options()) -> list[TableauNode]:
    f = _pick(u)
    if f is None:
        raise ValueError("node is poised")
    t = u.time
    match f:
        case And(left=l, right=r):
            return [_child(u, f, [l, r], opts, "AND")]
        case Or(left=l, right=r):
            return [_child(u, f, [l], opts, "OR"), _child(u, f, [r], opts, "OR")]
        case Implies():
            if opts.implication_rule:
                return [_child(u, f, adds, opts, "IMPLIES") for adds in heuristics.expand_implication(u.label, f, opts.gf_rules)]
            neg = to_strict_normal_form(Not(f.left), keep_gf=opts.gf_rules)
            return [_child(u, f, [neg], opts, "OR"), _child(u, f, [f.right], opts, "OR")]
        case Not():
            g = to_strict_normal_form(f, keep_gf=opts.gf_rules, keep_implies=opts.implication_rule)
            return [_child(u, f, [g], opts, "NOT")]
        case Temporal(op=op, args=args):
            par = (f.lo, f.hi) if opts.jump else None

            def ex(g):
                return temporal_expansion(g, t, par)

            marked = f.replace(marked=True)
            match op:
                case "G":
                    return [_child(u, f, [ex(args[0]), marked], opts, "G")]
                case "F":
                    return [_child(u, f, [ex(args[0])], opts, "F"), _child(u, f, [marked], opts, "F")]
                case "SU":
                    return [_child(u, f, [ex(args[1])], opts, "SU"), _child(u, f, [ex(args[0]), marked], opts, "SU")]
                case "SR":
                    return [
                        _child(u, f, [ex(args[0]), ex(args[1])], opts, "SR"),
                        _child(u, f, [ex(args[1]), marked], opts, "SR"),
                    ]
            raise ValueError(f"operator {op} must be normalised away")
    raise TypeError(f)


# ---------------------------------------------------------------- termination


ACCEPT, REJECT, CONTINUE = "accept", "reject", "continue"


def _doomed_until(u: TableauNode) -> bool:
    t = u.time
    return any(isinstance(f, Temporal) and f.marked and f.op in ("F", "SU") and f.hi == t for f in u.label)


def check_termination(u: TableauNode, lra: Callable[[Iterable], LraResult] = check_consistent):
    """(ACCEPT|REJECT|CONTINUE, reason) for a poised node."""
    if FALSE in u.label:
        return REJECT, "FALSE"
    cs = u.atoms()
    if cs and not lra(cs).sat:
        return REJECT, "LOCALLY-UNSAT"
    if _doomed_until(u):
        return REJECT, "UNTIL"
    if not any(isinstance(f, Temporal) for f in u.label):
        return ACCEPT, "EMPTY"
    return CONTINUE, None


# ---------------------------------------------------------------- advance rules


def step(u: TableauNode, opts: Options = Options()) -> TableauNode:
    t = u.time
    out = []
    for f in u.label:
        if isinstance(f, Temporal):
            if not f.marked:
                out.append(f)
            elif t < f.hi:
                out.append(f.replace(marked=False))
    label = tuple(dict.fromkeys(out))
    if opts.merge_redundant:
        label = heuristics.merge_redundant(label)
    return TableauNode(label, t + 1, u, "STEP")


def _recurrent(f: Temporal):
    match f.op:
        case "G" | "SU":
            return f.args[0]
        case "SR":
            return f.args[1]
    return None


def _live_generators(label: tuple) -> dict:
    live = {}
    for f in label:
        if isinstance(f, Temporal) and f.marked:
            rec = _recurrent(f)
            if rec is not None:
                s = live.setdefault((f.lo, f.hi), set())
                s.update((c.op, c.args) for c in temporal_closure(rec))
    return live


def adopt_orphans(label: tuple, t: int) -> tuple:
    """Drop the decoration of derived operators whose generating operator is gone.

    A derived operator is only periodic while the operator it was extracted
    from still regenerates it; once that one is discharged or released the
    copy is an ordinary one-off obligation.
    """
    live = _live_generators(label)
    out = []
    changed = False
    for f in label:
        if isinstance(f, Temporal) and f.parent != NO_PARENT and _in(t, f.parent):
            if (f.op, f.args) not in live.get(f.parent, ()):
                f = f.replace(parent=NO_PARENT)
                changed = True
        out.append(f)
    return tuple(dict.fromkeys(out)) if changed else label


def select_advance(u: TableauNode) -> str:
    t = u.time
    for f in u.label:
        if not (isinstance(f, Temporal) and f.marked) or _in(t, f.parent):
            continue
        if t == f.hi:
            return "STEP"
        rec = _recurrent(f)
        if rec is not None and any(t < f.lo + c.hi for c in temporal_closure(rec)):
            return "STEP"
    return "JUMP"


def _discharged_now(u: TableauNode) -> tuple:
    """Periodic derived operators handled and removed at the current instant.

    Their shifted twins are due at the jump target, which is a real instant
    rather than a copy of this one.
    """
    t = u.time
    live = _live_generators(u.label)
    present = {f.replace(marked=False) for f in u.label if isinstance(f, Temporal)}
    found = {}
    v = u.parent
    while v is not None and v.time == t:
        for f in v.label:
            if (
                isinstance(f, Temporal)
                and not f.marked
                and f.is_derived()
                and _in(t, f.parent)
                and f.lo <= t <= f.hi
                and f not in present
                and (f.op, f.args) in live.get(f.parent, ())
            ):
                found.setdefault(f.replace(marked=True))
        v = v.parent
    return tuple(found)


def jump(u: TableauNode, opts: Options = Options()) -> TableauNode:
    t = u.time
    ks = [b for f in u.label if isinstance(f, Temporal) and not _in(t, f.parent) for b in (f.lo, f.hi) if b > t]
    if not ks:
        return step(u, opts)
    k = min(ks) - t
    out = []
    for f in u.label + _discharged_now(u):
        if not isinstance(f, Temporal):
            continue
        periodic = _in(t, f.parent)
        if f.marked:
            # a derived copy expiring now has a shifted twin expiring at t + k
            if t >= f.hi and not periodic:
                continue
            f = f.replace(marked=False)
        out.append(f.shifted(k) if periodic else f)
    label = tuple(dict.fromkeys(out))
    if opts.merge_redundant:
        label = heuristics.merge_redundant(label)
    return TableauNode(label, t + k, u, "JUMP")


def advance(u: TableauNode, opts: Options = Options()) -> TableauNode:
    if not opts.jump:
        return step(u, opts)
    label = adopt_orphans(u.label, u.time)
    v = u if label is u.label else TableauNode(label, u.time, u.parent, u.rule)
    if select_advance(v) == "STEP":
        child = step(v, opts)
    else:
        child = jump(v, opts)
    child.parent = u
    return child


# ---------------------------------------------------------------- memoization


def _canon(label: tuple, t: int):
    out = []
    for f in label:
        if isinstance(f, Temporal):
            par = None if f.parent == NO_PARENT else (f.parent[0] - t, f.parent[1] - t)
            out.append(((f.op, f.args, par, f.marked), f.lo - t, f.hi - t))
    return out


def _implies(op: str, a: int, b: int, c: int, d: int) -> bool:
    """op[a,b] implies op[c,d] for the same arguments."""
    match op:
        case "G":
            return a <= c <= d <= b
        case "F":
            return c <= a <= b <= d
        case "SR":
            return a == c <= d <= b
        case "SU":
            return c == a <= b <= d
    return False


class MemoStore:
    """Rejected step/jump products, stored relative to their time."""

    def __init__(self):
        self.exact: set[frozenset] = set()
        self.entries: list[dict] = []
        self.by_skeleton: dict = {}

    def add(self, u: TableauNode):
        items = _canon(u.label, u.time)
        key = frozenset(items)
        if key in self.exact:
            return
        self.exact.add(key)
        entry: dict = {}
        for skel, lo, hi in items:
            entry.setdefault(skel, []).append((lo, hi))
        idx = len(self.entries)
        self.entries.append(entry)
        # index under an arbitrary skeleton of the entry: every match must contain it
        anchor = min(entry, key=lambda s: hash(s))
        self.by_skeleton.setdefault(anchor, []).append(idx)

    def implies(self, u: TableauNode) -> bool:
        items = _canon(u.label, u.time)
        if frozenset(items) in self.exact:
            return True
        have: dict = {}
        for skel, lo, hi in items:
            have.setdefault(skel, []).append((lo, hi))
        for skel in have:
            for idx in self.by_skeleton.get(skel, ()):
                if self._covers(have, self.entries[idx]):
                    return True
        return False

    @staticmethod
    def _covers(have: dict, entry: dict) -> bool:
        for skel, ivs in entry.items():
            mine = have.get(skel)
            if mine is None:
                return False
            op = skel[0]
            for c, d in ivs:
                if not any((a, b) == (c, d) or _implies(op, a, b, c, d) for a, b in mine):
                    return False
        return True


def memo_implies(n: TableauNode, store: MemoStore) -> bool:
    return store.implies(n)


def split_easy(u: TableauNode):
    """(easy, full) pair for a step/jump product, or None when no split applies."""
    easy = heuristics.split_easy(u.label)
    if easy is None:
        return None
    return TableauNode(easy, u.time, u.parent, u.rule + "-EASY"), u


# ---------------------------------------------------------------- search


def prepare(f: Formula, opts: Options = Options()) -> Formula:
    """Normalise f and apply the root-level rewrites enabled in opts."""
    g = to_strict_normal_form(f, keep_gf=opts.gf_rules, keep_implies=opts.implication_rule)
    if opts.interval_shift:
        g = heuristics.shift_nested_intervals(g)
    if opts.gf_unrolling and opts.gf_rules:
        g = heuristics.unroll_all(g)
    return g


class Timeout(Exception):
    pass


class _Frame:
    __slots__ = ("node", "children", "easy", "probing")

    def __init__(self, node, children, easy=None):
        self.node = node
        self.children = children  # reversed: pop() yields the next child
        self.easy = easy
        self.probing = False


class _Search:
    def __init__(self, opts: Options, H: int):
        self.opts = opts
        self.H = H
        self.stats = Stats()
        self.cache: dict[frozenset, bool] = {}
        self.memo = MemoStore() if opts.memoization else None
        self.deadline = None if opts.timeout_seconds is None else _time.monotonic() + opts.timeout_seconds
        self.trace: list | None = [] if opts.trace else None

    def lra(self, cs: frozenset) -> bool:
        hit = self.cache.get(cs)
        if hit is None:
            self.stats.lra_calls += 1
            hit = check_consistent(cs).sat
            self.cache[cs] = hit
        return hit

    def note(self, u, outcome, reason=None):
        if self.trace is not None:
            self.trace.append((u, outcome, reason))

    def visit(self, u: TableauNode):
        """ACCEPT / REJECT, or a frame to explore."""
        st = self.stats
        st.nodes += 1
        if self.deadline is not None and st.nodes % 256 == 0 and _time.monotonic() > self.deadline:
            raise Timeout
        t = u.time
        if t > st.max_time:
            st.max_time = t
        has_temporal = any(isinstance(f, Temporal) for f in u.label)
        if t > self.H + (0 if has_temporal else 1):
            st.horizon_violations += 1
        opts = self.opts
        if opts.early_check:
            if FALSE in u.label:
                self.note(u, REJECT, "FALSE")
                return REJECT
            if _doomed_until(u):
                self.note(u, REJECT, "UNTIL")
                return REJECT
            if u.rule not in ("STEP", "JUMP"):
                cs = u.atoms()
                if cs and not self.lra(cs):
                    self.note(u, REJECT, "LOCALLY-UNSAT")
                    return REJECT
        if not is_poised(u):
            self.note(u, CONTINUE, None)
            kids = expand(u, opts)
            return _Frame(u, kids[::-1])
        st.poised += 1
        verdict, reason = check_termination(u, lambda cs: LraResult("sat" if self.lra(frozenset(cs)) else "unsat"))
        self.note(u, verdict, reason)
        if verdict != CONTINUE:
            return verdict
        child = advance(u, opts)
        if child.rule == "JUMP":
            st.jumps += 1
            st.max_jump = max(st.max_jump, child.time - t)
        else:
            st.steps += 1
        if self.memo is not None and self.memo.implies(child):
            st.memo_hits += 1
            self.note(child, REJECT, "MEMO")
            return REJECT
        easy = None
        if opts.easy_first:
            pair = split_easy(child)
            if pair is not None:
                easy = pair[0]
                if self.memo is not None and self.memo.implies(easy):
                    st.memo_hits += 1
                    self.note(easy, REJECT, "MEMO")
                    self.remember(child)
                    return REJECT
        return _Frame(u, [child], easy)

    def remember(self, u: TableauNode):
        if self.memo is not None and u.rule.startswith(("STEP", "JUMP")):
            self.memo.add(u)

    def run(self, root: TableauNode) -> TableauNode | None:
        first = self.visit(root)
        if first == ACCEPT:
            return root
        if first == REJECT:
            return None
        stack = [first]
        while stack:
            fr = stack[-1]
            if fr.easy is not None and not fr.probing:
                fr.probing = True
                res = self.visit(fr.easy)
                if isinstance(res, _Frame):
                    stack.append(res)
                    continue
                if res == ACCEPT:
                    fr.easy = None
                    fr.probing = False
                    continue
                self._reject_probe(stack)
                continue
            if fr.probing:
                # the easy subtree was exhausted without acceptance
                self._reject_probe(stack)
                continue
            if not fr.children:
                stack.pop()
                self.remember(fr.node)
                continue
            child = fr.children.pop()
            res = self.visit(child)
            if isinstance(res, _Frame):
                stack.append(res)
            elif res == ACCEPT:
                probe = self._nearest_probe(stack)
                if probe is None:
                    return child
                while stack[-1] is not probe:
                    stack.pop()
                probe.easy = None
                probe.probing = False
            elif res == REJECT:
                self.remember(child)
        return None

    def _nearest_probe(self, stack):
        for fr in reversed(stack):
            if fr.probing:
                return fr
        return None

    def _reject_probe(self, stack):
        fr = stack.pop()
        self.remember(fr.node)
        if fr.easy is not None:
            self.remember(fr.easy)
        for c in fr.children:
            self.remember(c)


def solve(f: Formula, opts: Options = Options()) -> Verdict:
    g = prepare(f, opts)
    H = horizon(g)
    search = _Search(opts, H)
    root = TableauNode([g], 0)
    try:
        leaf = search.run(root)
    except Timeout:
        return Verdict("timeout", None, search.stats, g, H, search.trace)
    if leaf is None:
        return Verdict("unsat", None, search.stats, g, H, search.trace)
    branch = []
    u = leaf
    while u is not None:
        branch.append(u)
        u = u.parent
    branch.reverse()
    return Verdict("sat", branch, search.stats, g, H, search.trace)


def write_dot(trace: list, sink) -> None:
    """Graphviz dump of the explored tree."""
    sink.write("digraph tableau {\n  node [shape=box, fontname=monospace];\n")
    for u, outcome, reason in trace:
        text = repr(u).replace("\\", "\\\\").replace('"', '\\"')
        mark = {ACCEPT: " ✓", REJECT: " ✗"}.get(outcome, "")
        if reason:
            mark += f" {reason}"
        sink.write(f'  n{u.id} [label="{text}{mark}"];\n')
        if u.parent is not None:
            sink.write(f'  n{u.parent.id} -> n{u.id} [label="{u.rule}"];\n')
    sink.write("}\n")
