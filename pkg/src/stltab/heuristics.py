"""Satisfiability-preserving rewrites applied on top of the basic tableau."""

from __future__ import annotations

from .formula import (
    NO_PARENT,
    And,
    Formula,
    Implies,
    Not,
    Or,
    Temporal,
    _Binary,
    temporal_closure,
    to_strict_normal_form,
)


def expand_implication(label: tuple, f: Implies, keep_gf: bool = True):
    """Children for phi1 -> phi2: {!phi1} and {phi1, phi2}.

    Returns the two addition lists in visiting order: when phi1 already
    holds in the label the second child goes first.
    """
    neg = to_strict_normal_form(Not(f.left), keep_gf=keep_gf, keep_implies=True)
    first, second = [neg], [f.left, f.right]
    if f.left in label:
        return [second, first]
    return [first, second]


def unroll_g_f(f: Formula) -> Formula | None:
    """G[a,b]F[c,d]phi with a+2 <= b and c < d, split into a one-step head and a residual."""
    if not (isinstance(f, Temporal) and f.op == "G"):
        return None
    inner = f.args[0]
    if not (isinstance(inner, Temporal) and inner.op == "F" and not inner.marked):
        return None
    a, b, c, d = f.lo, f.hi, inner.lo, inner.hi
    if not (a + 2 <= b and c < d):
        return None
    phi = inner.args[0]
    p = f.parent
    head = Or(
        Temporal("F", a + c + 1, a + d, (phi,), p),
        And(Temporal("G", a + c, a + c, (phi,), p), Temporal("G", a + d + 1, a + d + 1, (phi,), p)),
    )
    return And(head, Temporal("G", a + 2, b, (inner,), p))


def unroll_all(f: Formula) -> Formula:
    """Apply the G-F unrolling once to every eligible occurrence."""
    match f:
        case Not(arg=a):
            return Not(unroll_all(a))
        case _Binary(left=l, right=r):
            return type(f)(unroll_all(l), unroll_all(r))
        case Temporal(args=args):
            g = f.replace(args=tuple(unroll_all(x) for x in args))
            out = unroll_g_f(g)
            return g if out is None else out
    return f


def _merge_pair(x: Temporal, y: Temporal) -> Temporal | None:
    if x.op == "G":
        if x.lo <= y.lo <= x.hi:
            return x.replace(hi=max(x.hi, y.hi))
        if y.lo <= x.lo <= y.hi:
            return y.replace(hi=max(x.hi, y.hi))
        return None
    # F: keep the tighter obligation when one interval contains the other
    if x.lo <= y.lo and y.hi <= x.hi:
        return y
    if y.lo <= x.lo and x.hi <= y.hi:
        return x
    return None


def _fixpoint(ops: list) -> list:
    work = list(ops)
    merged = True
    while merged:
        merged = False
        for i in range(len(work)):
            for j in range(i + 1, len(work)):
                m = _merge_pair(work[i], work[j])
                if m is not None:
                    work = [w for k, w in enumerate(work) if k not in (i, j)] + [m]
                    merged = True
                    break
            if merged:
                break
    return work


def merge_redundant(label: tuple) -> tuple:
    """Merge G operators with overlapping intervals and drop weaker F operators.

    Only operators with the same argument, mark and decoration are combined.
    """
    groups: dict = {}
    for f in label:
        if isinstance(f, Temporal) and f.op in ("G", "F"):
            groups.setdefault((f.op, f.args, f.parent, f.marked), []).append(f)
    if all(len(g) < 2 for g in groups.values()):
        return label
    slot: dict = {}
    for ops in groups.values():
        if len(ops) > 1:
            slot[ops[0]] = _fixpoint(ops)
            for op in ops[1:]:
                slot[op] = []
    out = {}
    for f in label:
        for g in slot.get(f, (f,)):
            out.setdefault(g)
    return tuple(out)


def shift_nested_intervals(f: Formula) -> Formula:
    """G/F whose argument is a boolean combination of temporal operators only.

    The smallest nested lower bound is moved onto the outer interval.
    """
    match f:
        case Not(arg=a):
            return Not(shift_nested_intervals(a))
        case _Binary(left=l, right=r):
            return type(f)(shift_nested_intervals(l), shift_nested_intervals(r))
        case Temporal(op=op, args=args):
            g = f.replace(args=tuple(shift_nested_intervals(x) for x in args))
            if op not in ("G", "F"):
                return g
            inner = g.args[0]
            if not _only_temporal(inner):
                return g
            m = min(t.lo for t in temporal_closure(inner))
            if m == 0:
                return g
            return g.replace(lo=g.lo + m, hi=g.hi + m, args=(_shift_down(inner, m),))
    return f


def _only_temporal(f: Formula) -> bool:
    # plain U/R constrain their left argument from t, so they cannot move
    match f:
        case Temporal(op=op):
            return op in ("G", "F", "SU", "SR")
        case Not(arg=a):
            return _only_temporal(a)
        case _Binary(left=l, right=r):
            return _only_temporal(l) and _only_temporal(r)
    return False


def _shift_down(f: Formula, m: int) -> Formula:
    match f:
        case Temporal():
            return f.replace(lo=f.lo - m, hi=f.hi - m)
        case Not(arg=a):
            return Not(_shift_down(a, m))
        case _Binary(left=l, right=r):
            return type(f)(_shift_down(l, m), _shift_down(r, m))
    return f


def is_easy(f: Formula) -> bool:
    """Temporal operator whose arguments contain no temporal operator."""
    return isinstance(f, Temporal) and not any(_has_temporal(a) for a in f.args)


def _has_temporal(f: Formula) -> bool:
    match f:
        case Temporal():
            return True
        case Not(arg=a):
            return _has_temporal(a)
        case _Binary(left=l, right=r):
            return _has_temporal(l) or _has_temporal(r)
    return False


def split_easy(label: tuple):
    """Easy part of a step/jump product, or None when there is nothing to gain."""
    easy = tuple(
        f.replace(parent=NO_PARENT) if f.is_derived() else f for f in label if is_easy(f)
    )
    if not easy or len(easy) == len(label):
        return None
    return easy
