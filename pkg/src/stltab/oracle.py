"""Reference semantics and brute-force satisfiability for small horizons.

Nothing here depends on the tableau: it reads formulas and, for real-valued
atoms, asks the simplex (cross-checked separately by Fourier-Motzkin).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import pycosat

from .formula import (
    EQ,
    GE,
    GT,
    NEQ,
    And,
    Atom,
    Formula,
    Implies,
    LinearConstraint,
    Not,
    Or,
    Temporal,
    TrueF,
    horizon,
    variables,
)
from .lra import check_consistent

DEFAULT_CAP = 14
MAX_THEORY_CHECKS = 2**18


class SignalTooShort(ValueError):
    pass


class OracleCapExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------- pointwise semantics


def evaluate(f: Formula, w, t: int = 0) -> bool:
    """Truth of f at time t over signal w (anything with .length and .values)."""
    need = t + horizon(f)
    if need >= w.length:
        raise SignalTooShort(f"signal of length {w.length} does not cover [0,{need}]")
    memo: dict = {}

    def ev(g: Formula, s: int) -> bool:
        key = (g, s)
        hit = memo.get(key)
        if hit is not None:
            return hit
        r = _ev(g, s)
        memo[key] = r
        return r

    def _ev(g: Formula, s: int) -> bool:
        match g:
            case TrueF():
                return True
            case Atom(constraint=c):
                return c.holds(w.values[s])
            case Not(arg=a):
                return not ev(a, s)
            case And(left=l, right=r):
                return ev(l, s) and ev(r, s)
            case Or(left=l, right=r):
                return ev(l, s) or ev(r, s)
            case Implies(left=l, right=r):
                return (not ev(l, s)) or ev(r, s)
            case Temporal(op=op, lo=a, hi=b, args=args):
                win = range(s + a, s + b + 1)
                match op:
                    case "G":
                        return all(ev(args[0], u) for u in win)
                    case "F":
                        return any(ev(args[0], u) for u in win)
                    case "U":
                        return any(ev(args[1], u) and all(ev(args[0], v) for v in range(s, u + 1)) for u in win)
                    case "R":
                        return all(ev(args[1], u) or any(ev(args[0], v) for v in range(s, u + 1)) for u in win)
                    case "SU":
                        return any(ev(args[1], u) and all(ev(args[0], v) for v in range(s + a, u)) for u in win)
                    case "SR":
                        return all(ev(args[1], u) or any(ev(args[0], v) for v in range(s + a, u)) for u in win)
        raise TypeError(g)

    return ev(f, t)


# ---------------------------------------------------------------- ground expansion


@dataclass(frozen=True)
class GConst:
    value: bool


@dataclass(frozen=True)
class GAtom:
    constraint: LinearConstraint
    time: int


@dataclass(frozen=True)
class GNot:
    arg: object


@dataclass(frozen=True)
class GAnd:
    args: tuple


@dataclass(frozen=True)
class GOr:
    args: tuple


@dataclass(frozen=True)
class GImplies:
    left: object
    right: object


GroundFormula = GConst | GAtom | GNot | GAnd | GOr | GImplies

GTRUE, GFALSE = GConst(True), GConst(False)


def _gand(parts) -> GroundFormula:
    parts = tuple(parts)
    if len(parts) == 1:
        return parts[0]
    return GAnd(parts) if parts else GTRUE


def _gor(parts) -> GroundFormula:
    parts = tuple(parts)
    if len(parts) == 1:
        return parts[0]
    return GOr(parts) if parts else GFALSE


def ground_expand(f: Formula, h: int | None = None, t: int = 0) -> GroundFormula:
    """Unroll f at time t into a Boolean combination of time-indexed atoms."""
    if h is not None and h < horizon(f):
        raise ValueError(f"horizon {h} is shorter than the formula horizon {horizon(f)}")
    memo: dict = {}

    def gx(g: Formula, s: int):
        key = (g, s)
        hit = memo.get(key)
        if hit is None:
            hit = memo[key] = _gx(g, s)
        return hit

    def _gx(g: Formula, s: int):
        match g:
            case TrueF():
                return GTRUE
            case Atom(constraint=c):
                return GAtom(c, s)
            case Not(arg=a):
                return GNot(gx(a, s))
            case And(left=l, right=r):
                return GAnd((gx(l, s), gx(r, s)))
            case Or(left=l, right=r):
                return GOr((gx(l, s), gx(r, s)))
            case Implies(left=l, right=r):
                return GImplies(gx(l, s), gx(r, s))
            case Temporal(op=op, lo=a, hi=b, args=args):
                win = range(s + a, s + b + 1)
                match op:
                    case "G":
                        return _gand(gx(args[0], u) for u in win)
                    case "F":
                        return _gor(gx(args[0], u) for u in win)
                    case "U":
                        return _gor(_gand([gx(args[1], u)] + [gx(args[0], v) for v in range(s, u + 1)]) for u in win)
                    case "R":
                        return _gand(_gor([gx(args[1], u)] + [gx(args[0], v) for v in range(s, u + 1)]) for u in win)
                    case "SU":
                        return _gor(_gand([gx(args[1], u)] + [gx(args[0], v) for v in range(s + a, u)]) for u in win)
                    case "SR":
                        return _gand(_gor([gx(args[1], u)] + [gx(args[0], v) for v in range(s + a, u)]) for u in win)
        raise TypeError(g)

    return gx(f, t)


def ground_value(g: GroundFormula, truth) -> bool:
    """Evaluate a ground formula; truth maps (constraint, time) to bool."""
    match g:
        case GConst(value=v):
            return v
        case GAtom(constraint=c, time=s):
            return truth(c, s)
        case GNot(arg=a):
            return not ground_value(a, truth)
        case GAnd(args=args):
            return all(ground_value(a, truth) for a in args)
        case GOr(args=args):
            return any(ground_value(a, truth) for a in args)
        case GImplies(left=l, right=r):
            return (not ground_value(l, truth)) or ground_value(r, truth)
    raise TypeError(g)


def ground_atoms(g: GroundFormula) -> set[tuple]:
    out = set()
    stack = [g]
    seen = set()
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        match x:
            case GAtom(constraint=c, time=s):
                out.add((c, s))
            case GNot(arg=a):
                stack.append(a)
            case GAnd(args=args) | GOr(args=args):
                stack.extend(args)
            case GImplies(left=l, right=r):
                stack += [l, r]
    return out


# ---------------------------------------------------------------- brute force


def is_boolean_encoded(f: Formula) -> bool:
    from .formula import atoms

    return all(len(c.terms) == 1 and c.terms[0][1] == 1 and c.rel in (EQ, NEQ) and c.bound == 1 for c in atoms(f))


@dataclass
class OracleResult:
    status: str  # "sat" | "unsat"
    model: dict | None = None  # (var, time) -> value

    @property
    def sat(self) -> bool:
        return self.status == "sat"


class _Cnf:
    def __init__(self):
        self.n = 0
        self.clauses: list[list[int]] = []
        self.atom_var: dict = {}

    def new(self) -> int:
        self.n += 1
        return self.n

    def lit(self, g, memo) -> int:
        hit = memo.get(id(g))
        if hit is not None:
            return hit[0]
        match g:
            case GConst(value=v):
                x = self.new()
                self.clauses.append([x] if v else [-x])
            case GAtom(constraint=c):
                if c.rel == NEQ:
                    return -self.lit(GAtom(c.with_rel(EQ), g.time), memo)
                key = (c, g.time)
                x = self.atom_var.get(key)
                if x is None:
                    x = self.atom_var[key] = self.new()
            case GNot(arg=a):
                x = -self.lit(a, memo)
            case GAnd(args=args):
                ls = [self.lit(a, memo) for a in args]
                x = self.new()
                for l in ls:
                    self.clauses.append([-x, l])
                self.clauses.append([x] + [-l for l in ls])
            case GOr(args=args):
                ls = [self.lit(a, memo) for a in args]
                x = self.new()
                for l in ls:
                    self.clauses.append([x, -l])
                self.clauses.append([-x] + ls)
            case GImplies(left=l, right=r):
                return self.lit(GOr((GNot(l), r)), memo)
            case _:
                raise TypeError(g)
        memo[id(g)] = (x, g)
        return x


def _timed(c: LinearConstraint, s: int, rel: str | None = None, negate_terms=False) -> LinearConstraint:
    sign = -1 if negate_terms else 1
    return LinearConstraint([(f"{v}@{s}", sign * k) for v, k in c.terms], rel or c.rel, sign * c.bound)


def _theory_literal(c: LinearConstraint, s: int, positive: bool) -> list[LinearConstraint]:
    rel = c.rel
    if positive:
        return [_timed(c, s, rel)]
    match rel:
        case ">":
            return [_timed(c, s, GE, negate_terms=True)]
        case ">=":
            return [_timed(c, s, GT, negate_terms=True)]
    return []  # negated equalities are handled through the side atoms


def brute_force_check(f: Formula, cap: int = DEFAULT_CAP, method: str = "auto") -> OracleResult:
    """Decide f by exhaustive search over its ground expansion.

    Boolean-encoded formulas are either enumerated signal by signal or handed
    to a SAT solver; real-valued ones go through SAT with lazily checked
    linear arithmetic.
    """
    h = horizon(f)
    if h > cap:
        raise OracleCapExceeded(f"horizon {h} exceeds the oracle cap {cap}")
    boolean = is_boolean_encoded(f)
    if boolean:
        names = sorted(variables(f))
        if method == "enumerate" or (method == "auto" and len(names) * (h + 1) <= 12):
            return _enumerate(f, names, h)
    elif method == "enumerate":
        raise ValueError("enumeration needs Boolean-encoded atoms")
    g = ground_expand(f, h)
    cnf = _Cnf()
    root = cnf.lit(g, {})
    cnf.clauses.append([root])
    if boolean:
        sol = pycosat.solve(cnf.clauses)
        if sol == "UNSAT":
            return OracleResult("unsat")
        pos = set(x for x in sol if x > 0)
        model = {}
        for (c, s), x in cnf.atom_var.items():
            model[(c.terms[0][0], s)] = Fraction(1 if (x in pos) == (c.rel == EQ) else 0)
        return OracleResult("sat", model)
    return _lazy_lra(cnf)


def _enumerate(f: Formula, names: list[str], h: int) -> OracleResult:
    from .witness import Signal

    cells = [(v, s) for s in range(h + 1) for v in names]
    for bits in itertools.product((0, 1), repeat=len(cells)):
        rows = [dict() for _ in range(h + 1)]
        for (v, s), b in zip(cells, bits):
            rows[s][v] = Fraction(b)
        if evaluate(f, Signal(h + 1, rows), 0):
            return OracleResult("sat", {(v, s): rows[s][v] for v, s in cells})
    return OracleResult("unsat")


def _lazy_lra(cnf: _Cnf) -> OracleResult:
    clauses = cnf.clauses
    # equalities that are false must hold strictly one way or the other
    side: dict = {}
    for (c, s), x in list(cnf.atom_var.items()):
        if c.rel == EQ:
            above, below = cnf.new(), cnf.new()
            clauses += [[x, above, below], [-x, -above], [-x, -below], [-above, -below]]
            side[x] = (c, s, above, below)
    for _ in range(MAX_THEORY_CHECKS):
        sol = pycosat.solve(clauses)
        if sol == "UNSAT":
            return OracleResult("unsat")
        pos = set(v for v in sol if v > 0)
        lits = []
        cons = []
        for (c, s), x in cnf.atom_var.items():
            val = x in pos
            lits.append(x if val else -x)
            cons.append(_theory_literal(c, s, val))
            if x in side:
                _, _, above, below = side[x]
                for y, sign in ((above, 1), (below, -1)):
                    if y in pos:
                        lits.append(y)
                        cons.append([_timed(c.with_rel(GT), s, GT, negate_terms=sign < 0)])
        flat = [k for cs in cons for k in cs]
        res = check_consistent(flat)
        if res.sat:
            model = {}
            for name, v in res.model.items():
                var, s = name.rsplit("@", 1)
                model[(var, int(s))] = v
            return OracleResult("sat", model)
        core = _shrink(lits, cons)
        clauses.append([-l for l in core])
    raise OracleCapExceeded("too many theory conflicts")


def _shrink(lits: list[int], cons: list[list]) -> list[int]:
    """Deletion-based minimal inconsistent subset of the theory literals."""
    keep = list(range(len(lits)))
    i = 0
    while i < len(keep):
        trial = keep[:i] + keep[i + 1 :]
        if not check_consistent([k for j in trial for k in cons[j]]).sat:
            keep = trial
        else:
            i += 1
    return [lits[j] for j in keep]


# ---------------------------------------------------------------- Fourier-Motzkin


def fm_consistent(constraints: Iterable[LinearConstraint]) -> bool:
    """Independent decision procedure for conjunctions of >, >=, == constraints."""
    rows: set = set()
    for c in constraints:
        coeffs = tuple(sorted(c.terms))
        match c.rel:
            case ">":
                rows.add((coeffs, c.bound, True))
            case ">=":
                rows.add((coeffs, c.bound, False))
            case "==":
                rows.add((coeffs, c.bound, False))
                rows.add((tuple((v, -k) for v, k in coeffs), -c.bound, False))
            case _:
                raise ValueError("disequalities are not supported")
    names = sorted({v for coeffs, _, _ in rows for v, _ in coeffs})
    for x in names:
        lower, upper, rest = [], [], []
        for row in rows:
            coeffs, k, strict = row
            a = dict(coeffs).get(x, 0)
            (lower if a > 0 else upper if a < 0 else rest).append(row)
        new = set(rest)
        for lc, lk, ls in lower:
            la = dict(lc)[x]
            for uc, uk, us in upper:
                ua = -dict(uc)[x]
                acc: dict = {}
                for v, k in lc:
                    acc[v] = acc.get(v, 0) + k / la
                for v, k in uc:
                    acc[v] = acc.get(v, 0) + k / ua
                coeffs = tuple(sorted((v, k) for v, k in acc.items() if k != 0 and v != x))
                new.add((coeffs, lk / la + uk / ua, ls or us))
        rows = new
    for coeffs, k, strict in rows:
        assert not coeffs
        if (0 <= k) if strict else (0 < k):
            return False
    return True
