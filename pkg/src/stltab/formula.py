"""Formula AST, parser, printer and the syntactic transformations used by the tableau."""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping

GT, GE, EQ, NEQ = ">", ">=", "==", "!="

NO_PARENT = (-1, -1)


class LinearConstraint:
    """sum(c_i * x_i) <rel> bound, with rel one of > >= == !=."""

    __slots__ = ("terms", "rel", "bound", "_hash")

    def __init__(self, terms, rel: str, bound):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[str, Fraction] = {}
        for v, c in items:
            acc[v] = acc.get(v, Fraction(0)) + Fraction(c)
        if rel not in (GT, GE, EQ, NEQ):
            raise ValueError(f"unknown relation {rel!r}")
        self.terms = tuple(sorted((v, c) for v, c in acc.items() if c != 0))
        self.rel = rel
        self.bound = Fraction(bound)
        self._hash = hash((self.terms, rel, self.bound))

    def __eq__(self, other):
        return (
            isinstance(other, LinearConstraint)
            and self._hash == other._hash
            and self.terms == other.terms
            and self.rel == other.rel
            and self.bound == other.bound
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"LinearConstraint({format_constraint(self)!r})"

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.terms)

    def is_ground(self) -> bool:
        return not self.terms

    def lhs(self, assignment: Mapping[str, Fraction]) -> Fraction:
        return sum((c * Fraction(assignment.get(v, 0)) for v, c in self.terms), Fraction(0))

    def holds(self, assignment: Mapping[str, Fraction]) -> bool:
        return compare(self.lhs(assignment), self.rel, self.bound)

    def with_rel(self, rel: str) -> LinearConstraint:
        return LinearConstraint(self.terms, rel, self.bound)

    def negated_terms(self, rel: str) -> LinearConstraint:
        """-f rel -k"""
        return LinearConstraint([(v, -c) for v, c in self.terms], rel, -self.bound)


def compare(value: Fraction, rel: str, bound: Fraction) -> bool:
    match rel:
        case ">":
            return value > bound
        case ">=":
            return value >= bound
        case "==":
            return value == bound
        case "!=":
            return value != bound
    raise ValueError(rel)


# ---------------------------------------------------------------- AST


class Formula:
    __slots__ = ("_hash",)

    def __str__(self):
        return format_formula(self)

    def __repr__(self):
        return f"<{type(self).__name__} {format_formula(self, decorations=True)}>"


class TrueF(Formula):
    __slots__ = ()

    def __init__(self):
        self._hash = hash("true")

    def __eq__(self, other):
        return isinstance(other, TrueF)

    def __hash__(self):
        return self._hash


TRUE = TrueF()


class Atom(Formula):
    __slots__ = ("constraint",)

    def __init__(self, constraint: LinearConstraint):
        self.constraint = constraint
        self._hash = hash(("atom", constraint))

    def __eq__(self, other):
        return isinstance(other, Atom) and self._hash == other._hash and self.constraint == other.constraint

    def __hash__(self):
        return self._hash


class Not(Formula):
    __slots__ = ("arg",)

    def __init__(self, arg: Formula):
        self.arg = arg
        self._hash = hash(("not", arg))

    def __eq__(self, other):
        return isinstance(other, Not) and self._hash == other._hash and self.arg == other.arg

    def __hash__(self):
        return self._hash


FALSE = Not(TRUE)


class _Binary(Formula):
    __slots__ = ("left", "right")
    tag = ""

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right
        self._hash = hash((self.tag, left, right))

    def __eq__(self, other):
        return (
            type(other) is type(self)
            and self._hash == other._hash
            and self.left == other.left
            and self.right == other.right
        )

    def __hash__(self):
        return self._hash


class And(_Binary):
    __slots__ = ()
    tag = "and"


class Or(_Binary):
    __slots__ = ()
    tag = "or"


class Implies(_Binary):
    __slots__ = ()
    tag = "implies"


UNARY_OPS = ("G", "F")
BINARY_OPS = ("U", "R", "SU", "SR")


class Temporal(Formula):
    """Bounded temporal operator.

    ``parent`` is the interval of the operator this one was extracted from,
    or (-1, -1). ``marked`` records that the operator was already expanded at
    the current instant.
    """

    __slots__ = ("op", "lo", "hi", "args", "parent", "marked")

    def __init__(self, op: str, lo: int, hi: int, args: tuple, parent=NO_PARENT, marked=False):
        if op not in UNARY_OPS + BINARY_OPS:
            raise ValueError(f"unknown temporal operator {op!r}")
        if len(args) != (1 if op in UNARY_OPS else 2):
            raise ValueError(f"wrong arity for {op}")
        if not 0 <= lo <= hi:
            raise ValueError(f"bad interval [{lo},{hi}]")
        self.op = op
        self.lo = lo
        self.hi = hi
        self.args = tuple(args)
        self.parent = tuple(parent)
        self.marked = marked
        self._hash = hash((op, lo, hi, self.args, self.parent, marked))

    def __eq__(self, other):
        return (
            isinstance(other, Temporal)
            and self._hash == other._hash
            and self.op == other.op
            and self.lo == other.lo
            and self.hi == other.hi
            and self.marked == other.marked
            and self.parent == other.parent
            and self.args == other.args
        )

    def __hash__(self):
        return self._hash

    def replace(self, **kw) -> Temporal:
        d = dict(op=self.op, lo=self.lo, hi=self.hi, args=self.args, parent=self.parent, marked=self.marked)
        d.update(kw)
        return Temporal(**d)

    def shifted(self, k: int) -> Temporal:
        return self.replace(lo=self.lo + k, hi=self.hi + k)

    def is_derived(self) -> bool:
        return self.parent != NO_PARENT


def G(lo, hi, arg):
    return Temporal("G", lo, hi, (arg,))


def F(lo, hi, arg):
    return Temporal("F", lo, hi, (arg,))


def U(lo, hi, left, right):
    return Temporal("U", lo, hi, (left, right))


def R(lo, hi, left, right):
    return Temporal("R", lo, hi, (left, right))


def atom(terms, rel, bound) -> Atom:
    return Atom(LinearConstraint(terms, rel, bound))


def prop(name: str) -> Atom:
    """Boolean proposition p, encoded as x_p == 1."""
    return atom({f"x_{name}": 1}, EQ, 1)


def is_term(f: Formula) -> bool:
    return isinstance(f, (Atom, TrueF)) or (isinstance(f, Not) and isinstance(f.arg, TrueF))


def conjoin(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return TRUE
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = And(f, out)
    return out


# ---------------------------------------------------------------- structural queries


def horizon(f: Formula) -> int:
    match f:
        case TrueF() | Atom():
            return 0
        case Not(arg=a):
            return horizon(a)
        case _Binary(left=l, right=r):
            return max(horizon(l), horizon(r))
        case Temporal(hi=hi, args=args):
            return hi + max(horizon(a) for a in args)
    raise TypeError(f)


def variables(f: Formula) -> set[str]:
    out: set[str] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        match g:
            case Atom(constraint=c):
                out.update(c.variables)
            case Not(arg=a):
                stack.append(a)
            case _Binary(left=l, right=r):
                stack += [l, r]
            case Temporal(args=args):
                stack += args
    return out


def atoms(f: Formula) -> set[LinearConstraint]:
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        match g:
            case Atom(constraint=c):
                out.add(c)
            case Not(arg=a):
                stack.append(a)
            case _Binary(left=l, right=r):
                stack += [l, r]
            case Temporal(args=args):
                stack += args
    return out


def pcl(f: Formula) -> set[Formula]:
    """One-level closure: immediate boolean children, or the formula itself."""
    match f:
        case Not(arg=a):
            return {a}
        case _Binary(left=l, right=r):
            return {l, r}
    return {f}


def temporal_closure(f: Formula) -> set[Temporal]:
    """Temporal operators reachable from f through boolean connectives only."""
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        match g:
            case Temporal():
                out.add(g)
            case Not(arg=a):
                stack.append(a)
            case _Binary(left=l, right=r):
                stack += [l, r]
    return out


def nesting_depth(f: Formula) -> int:
    match f:
        case TrueF() | Atom():
            return 0
        case Not(arg=a):
            return nesting_depth(a)
        case _Binary(left=l, right=r):
            return max(nesting_depth(l), nesting_depth(r))
        case Temporal(args=args):
            return 1 + max(nesting_depth(a) for a in args)
    raise TypeError(f)


def temporal_expansion(f: Formula, t: int, parent=None) -> Formula:
    """Shift the intervals of the outermost temporal operators by t.

    When ``parent`` is given it becomes the decoration of those operators.
    """
    match f:
        case Temporal():
            g = f.shifted(t) if t else f
            if parent is not None:
                g = g.replace(parent=tuple(parent))
            return g
        case Not(arg=a):
            return Not(temporal_expansion(a, t, parent))
        case _Binary(left=l, right=r):
            return type(f)(temporal_expansion(l, t, parent), temporal_expansion(r, t, parent))
    return f


# ---------------------------------------------------------------- normal form


def negate_constraint(c: LinearConstraint) -> Formula:
    match c.rel:
        case ">":
            return Atom(c.negated_terms(GE))
        case ">=":
            return Atom(c.negated_terms(GT))
        case "==":
            return Or(Atom(c.with_rel(GT)), Atom(c.negated_terms(GT)))
        case "!=":
            return Atom(c.with_rel(EQ))
    raise ValueError(c.rel)


def to_strict_normal_form(f: Formula, keep_gf: bool = True, keep_implies: bool = False) -> Formula:
    """Negation normal form over >, >=, ==, strict until and strict release.

    With ``keep_gf`` the G and F operators survive; otherwise they become
    sR(false, .) and sU(true, .). ``keep_implies`` keeps positive implications.
    """
    memo: dict = {}

    def go(g: Formula, neg: bool) -> Formula:
        key = (g, neg)
        hit = memo.get(key)
        if hit is not None:
            return hit
        res = _snf(g, neg)
        memo[key] = res
        return res

    def _snf(g: Formula, neg: bool) -> Formula:
        match g:
            case TrueF():
                return FALSE if neg else TRUE
            case Atom(constraint=c):
                if neg:
                    return negate_constraint(c)
                if c.rel == NEQ:
                    return Or(Atom(c.with_rel(GT)), Atom(c.negated_terms(GT)))
                return g
            case Not(arg=a):
                return go(a, not neg)
            case And(left=l, right=r):
                return Or(go(l, True), go(r, True)) if neg else And(go(l, False), go(r, False))
            case Or(left=l, right=r):
                return And(go(l, True), go(r, True)) if neg else Or(go(l, False), go(r, False))
            case Implies(left=l, right=r):
                if neg:
                    return And(go(l, False), go(r, True))
                if keep_implies:
                    return Implies(go(l, False), go(r, False))
                return Or(go(l, True), go(r, False))
            case Temporal(op=op, lo=lo, hi=hi, args=args, parent=p):
                match op:
                    case "G" | "F":
                        a = go(args[0], neg)
                        dual = {"G": "F", "F": "G"}[op] if neg else op
                        if keep_gf:
                            return Temporal(dual, lo, hi, (a,), p)
                        if dual == "G":
                            return Temporal("SR", lo, hi, (FALSE, a), p)
                        return Temporal("SU", lo, hi, (TRUE, a), p)
                    case "SU" | "SR":
                        dual = {"SU": "SR", "SR": "SU"}[op] if neg else op
                        return Temporal(dual, lo, hi, (go(args[0], neg), go(args[1], neg)), p)
                    case "U":
                        a1, a2 = args
                        return go(And(G(0, lo, a1), Temporal("SU", lo, hi, (a1, And(a1, a2)))), neg)
                    case "R":
                        a1, a2 = args
                        return go(Or(F(0, lo, a1), Temporal("SR", lo, hi, (a1, Or(a1, a2)))), neg)
        raise TypeError(g)

    return go(f, False)


# ---------------------------------------------------------------- printing


def _num(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_constraint(c: LinearConstraint) -> str:
    parts = []
    for i, (v, k) in enumerate(c.terms):
        sign = "-" if k < 0 else "+"
        mag = abs(k)
        body = v if mag == 1 else f"{_num(mag)}*{v}"
        if i == 0:
            parts.append(("-" if k < 0 else "") + body)
        else:
            parts.append(f"{sign} {body}")
    lhs = " ".join(parts) if parts else "0"
    return f"{lhs} {c.rel} {_num(c.bound)}"


def format_formula(f: Formula, decorations: bool = False) -> str:
    def go(g: Formula) -> str:
        match g:
            case TrueF():
                return "true"
            case Not(arg=TrueF()):
                return "false"
            case Atom(constraint=c):
                return format_constraint(c)
            case Not(arg=a):
                return f"!({go(a)})"
            case And(left=l, right=r):
                return f"({go(l)}) & ({go(r)})"
            case Or(left=l, right=r):
                return f"({go(l)}) | ({go(r)})"
            case Implies(left=l, right=r):
                return f"({go(l)}) -> ({go(r)})"
            case Temporal(op=op, lo=lo, hi=hi, args=args):
                tag = op
                if decorations:
                    if g.marked:
                        tag = "*" + tag
                    if g.parent != NO_PARENT:
                        tag += f"^[{g.parent[0]},{g.parent[1]}]"
                if len(args) == 1:
                    return f"{tag}[{lo},{hi}] ({go(args[0])})"
                return f"({go(args[0])}) {tag}[{lo},{hi}] ({go(args[1])})"
        raise TypeError(g)

    return go(f)


# ---------------------------------------------------------------- parsing


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<op><->|->|>=|<=|==|!=|&&|\|\||[-+*/()\[\],!&|<>=~])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.']*)
    """,
    re.VERBOSE,
)

_TEMPORAL_KEYWORDS = {"G", "F", "U", "R", "SU", "SR"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                self.fail("unexpected character", pos)
            if m.lastgroup != "ws":
                self.toks.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.toks.append(("eof", "", len(text)))
        self.i = 0

    def fail(self, msg, pos=None):
        if pos is None:
            pos = self.toks[self.i][2]
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        raise ParseError(msg, line, col)

    @property
    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def accept(self, *values) -> bool:
        kind, val, _ = self.peek
        if kind in ("op", "ident") and val in values:
            self.i += 1
            return True
        return False

    def expect(self, value):
        if not self.accept(value):
            self.fail(f"expected {value!r}, found {self.peek[1] or 'end of input'!r}")

    def parse(self) -> Formula:
        f = self.implication()
        if self.peek[0] != "eof":
            self.fail(f"unexpected {self.peek[1]!r}")
        return f

    def implication(self):
        left = self.disjunction()
        if self.accept("->"):
            return Implies(left, self.implication())
        if self.accept("<->"):
            right = self.implication()
            return And(Implies(left, right), Implies(right, left))
        return left

    def disjunction(self):
        f = self.conjunction()
        while self.accept("|", "||"):
            f = Or(f, self.conjunction())
        return f

    def conjunction(self):
        f = self.binary_temporal()
        while self.accept("&", "&&"):
            f = And(f, self.binary_temporal())
        return f

    def binary_temporal(self):
        f = self.unary()
        while True:
            kind, val, _ = self.peek
            if kind == "ident" and val in ("U", "R", "SU", "SR"):
                self.take()
                lo, hi = self.interval()
                f = Temporal(val, lo, hi, (f, self.unary()))
            else:
                return f

    def interval(self):
        start = self.peek[2]
        self.expect("[")
        lo = self.integer()
        self.expect(",")
        hi = self.integer()
        self.expect("]")
        if lo > hi:
            self.fail(f"empty interval [{lo},{hi}]", start)
        return lo, hi

    def integer(self) -> int:
        kind, val, pos = self.take()
        if kind != "num" or not val.isdigit():
            self.fail("expected a non-negative integer bound", pos)
        return int(val)

    def unary(self):
        kind, val, pos = self.peek
        if self.accept("!", "~"):
            return Not(self.unary())
        if kind == "ident" and val in ("G", "F") and self.toks[self.i + 1][1] == "[":
            self.take()
            lo, hi = self.interval()
            return Temporal(val, lo, hi, (self.unary(),))
        if kind == "ident" and val in ("true", "false"):
            self.take()
            return TRUE if val == "true" else FALSE
        if val == "(":
            # either a parenthesised formula or the start of an arithmetic expression
            save = self.i
            self.take()
            try:
                inner = self.implication()
                self.expect(")")
                if self.peek[1] not in _REL_TOKENS and self.peek[1] not in ("+", "-", "*", "/"):
                    return inner
            except ParseError:
                pass
            self.i = save
        return self.comparison()

    def comparison(self):
        start = self.peek[2]
        lhs = self.expr()
        kind, val, pos = self.peek
        if val not in _REL_TOKENS:
            if len(lhs[0]) == 1 and lhs[1] == 0 and next(iter(lhs[0].values())) == 1 and self._bare:
                name = next(iter(lhs[0]))
                return prop(name)
            self.fail("expected a comparison operator")
        self.take()
        rhs = self.expr()
        terms = dict(lhs[0])
        for v, c in rhs[0].items():
            terms[v] = terms.get(v, 0) - c
        k = rhs[1] - lhs[1]
        match val:
            case ">" | ">=" | "==" | "!=":
                rel = {"==": EQ}.get(val, val)
            case "=":
                rel = EQ
            case "<":
                terms = {v: -c for v, c in terms.items()}
                k, rel = -k, GT
            case "<=":
                terms = {v: -c for v, c in terms.items()}
                k, rel = -k, GE
        c = LinearConstraint(terms, rel, k)
        if c.is_ground():
            return TRUE if compare(Fraction(0), c.rel, c.bound) else FALSE
        return Atom(c)

    # linear expressions: returns (coeffs, constant)
    def expr(self):
        self._bare = True
        terms, const = self.term()
        while self.peek[1] in ("+", "-"):
            self._bare = False
            sign = 1 if self.take()[1] == "+" else -1
            t2, c2 = self.term()
            for v, c in t2.items():
                terms[v] = terms.get(v, 0) + sign * c
            const += sign * c2
        return terms, const

    def term(self):
        terms, const = self.factor()
        while self.peek[1] in ("*", "/"):
            self._bare = False
            op = self.take()[1]
            pos = self.peek[2]
            t2, c2 = self.factor()
            if op == "*":
                if t2 and terms:
                    self.fail("non-linear product", pos)
                if t2:
                    terms, const, t2, c2 = t2, c2, terms, const
                terms = {v: c * c2 for v, c in terms.items()}
                const = const * c2
            else:
                if t2:
                    self.fail("division by a variable", pos)
                if c2 == 0:
                    self.fail("division by zero", pos)
                terms = {v: c / c2 for v, c in terms.items()}
                const = const / c2
        return terms, const

    def factor(self):
        kind, val, pos = self.take()
        if val == "-":
            self._bare = False
            t, c = self.factor()
            return {v: -k for v, k in t.items()}, -c
        if val == "+":
            return self.factor()
        if kind == "num":
            self._bare = False
            return {}, Fraction(val)
        if kind == "ident" and val not in _TEMPORAL_KEYWORDS and val not in ("true", "false"):
            return {val: Fraction(1)}, Fraction(0)
        if val == "(":
            self._bare = False
            t, c = self.expr()
            self._bare = False
            self.expect(")")
            return t, c
        self.fail(f"unexpected {val or 'end of input'!r}", pos)


_REL_TOKENS = {">", ">=", "<", "<=", "==", "!=", "="}


def parse(text: str) -> Formula:
    """Parse a formula. Bare identifiers are Boolean propositions (x_p == 1)."""
    return _Parser(text).parse()
