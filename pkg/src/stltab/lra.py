"""Exact-rational simplex for conjunctions of linear constraints.

Strict inequalities are handled with delta-rationals: a value c + k*delta
stands for c + k*eps for an arbitrarily small positive eps. Models are
concretised by picking a small enough rational delta.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .formula import EQ, GE, GT, NEQ, LinearConstraint, compare

ConstraintSet = Sequence[LinearConstraint]

ZERO = Fraction(0)


@dataclass
class LraResult:
    status: str  # "sat" | "unsat"
    model: dict[str, Fraction] | None = field(default=None)

    @property
    def sat(self) -> bool:
        return self.status == "sat"


# delta-rationals are (c, k) tuples compared lexicographically


def _add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _scale(a, s):
    return (a[0] * s, a[1] * s)


class LraSolver:
    """Bounded general simplex with Bland's rule and push/pop of bounds."""

    def __init__(self):
        self.names: list[str] = []  # index -> name (slacks are "$<n>")
        self.index: dict[str, int] = {}
        self.lower: dict[int, tuple] = {}
        self.upper: dict[int, tuple] = {}
        self.value: dict[int, tuple] = {}
        self.rows: dict[int, dict[int, Fraction]] = {}  # basic -> {nonbasic: coeff}
        self.slack_of: dict[tuple, int] = {}
        self.conflict = False
        self._trail: list[tuple] = []

    def _var(self, name: str) -> int:
        i = self.index.get(name)
        if i is None:
            i = len(self.names)
            self.names.append(name)
            self.index[name] = i
            self.value[i] = (ZERO, ZERO)
        return i

    def _slack(self, terms: tuple) -> int:
        s = self.slack_of.get(terms)
        if s is not None:
            return s
        s = len(self.names)
        self.names.append(f"${s}")
        self.slack_of[terms] = s
        row: dict[int, Fraction] = {}
        for name, c in terms:
            x = self._var(name)
            if x in self.rows:
                for y, d in self.rows[x].items():
                    row[y] = row.get(y, ZERO) + c * d
                    if row[y] == 0:
                        del row[y]
            else:
                row[x] = row.get(x, ZERO) + c
                if row[x] == 0:
                    del row[x]
        self.rows[s] = row
        self.value[s] = self._eval_row(row)
        return s

    def _eval_row(self, row):
        acc = (ZERO, ZERO)
        for y, c in row.items():
            acc = _add(acc, _scale(self.value[y], c))
        return acc

    def push(self):
        self._trail.append((dict(self.lower), dict(self.upper), self.conflict))

    def pop(self):
        self.lower, self.upper, self.conflict = self._trail.pop()

    def add(self, c: LinearConstraint):
        if c.rel == NEQ:
            raise ValueError("disequalities must be split before reaching the solver")
        if self.conflict:
            return
        if c.is_ground():
            if not compare(ZERO, c.rel, c.bound):
                self.conflict = True
            return
        if len(c.terms) == 1:
            name, a = c.terms[0]
            x = self._var(name)
            k = c.bound / a
            flip = a < 0
        else:
            # normalise so the leading coefficient is 1 to share slacks
            a = c.terms[0][1]
            norm = tuple((v, q / a) for v, q in c.terms)
            x = self._slack(norm)
            k = c.bound / a
            flip = a < 0
        strict = c.rel == GT
        if c.rel == EQ:
            self._bound_lower(x, (k, ZERO))
            self._bound_upper(x, (k, ZERO))
        elif not flip:
            self._bound_lower(x, (k, Fraction(1) if strict else ZERO))
        else:
            self._bound_upper(x, (k, Fraction(-1) if strict else ZERO))

    def _bound_lower(self, x, b):
        cur = self.lower.get(x)
        if cur is None or b > cur:
            self.lower[x] = b
            up = self.upper.get(x)
            if up is not None and b > up:
                self.conflict = True
            elif x not in self.rows and self.value[x] < b:
                self._update(x, b)

    def _bound_upper(self, x, b):
        cur = self.upper.get(x)
        if cur is None or b < cur:
            self.upper[x] = b
            lo = self.lower.get(x)
            if lo is not None and b < lo:
                self.conflict = True
            elif x not in self.rows and self.value[x] > b:
                self._update(x, b)

    def _update(self, x, v):
        diff = (v[0] - self.value[x][0], v[1] - self.value[x][1])
        for b, row in self.rows.items():
            c = row.get(x)
            if c is not None:
                self.value[b] = _add(self.value[b], _scale(diff, c))
        self.value[x] = v

    def _pivot(self, b, n):
        row = self.rows.pop(b)
        a = row.pop(n)
        # n = (b - sum row) / a
        new = {y: -c / a for y, c in row.items()}
        new[b] = 1 / a
        self.rows[n] = new
        for other, r in self.rows.items():
            if other == n:
                continue
            c = r.pop(n, None)
            if c is None:
                continue
            for y, d in new.items():
                v = r.get(y, ZERO) + c * d
                if v == 0:
                    r.pop(y, None)
                else:
                    r[y] = v

    def _pivot_and_update(self, b, n, v):
        a = self.rows[b][n]
        theta = _scale((v[0] - self.value[b][0], v[1] - self.value[b][1]), 1 / a)
        self.value[b] = v
        self.value[n] = _add(self.value[n], theta)
        for other, r in self.rows.items():
            if other != b:
                c = r.get(n)
                if c is not None:
                    self.value[other] = _add(self.value[other], _scale(theta, c))
        self._pivot(b, n)

    def check(self) -> bool:
        if self.conflict:
            return False
        while True:
            viol = None
            for b in sorted(self.rows):
                v = self.value[b]
                lo = self.lower.get(b)
                if lo is not None and v < lo:
                    viol = (b, lo, True)
                    break
                up = self.upper.get(b)
                if up is not None and v > up:
                    viol = (b, up, False)
                    break
            if viol is None:
                return True
            b, target, increase = viol
            row = self.rows[b]
            pick = None
            for n in sorted(row):
                c = row[n]
                if (c > 0) == increase:
                    up = self.upper.get(n)
                    if up is None or self.value[n] < up:
                        pick = n
                        break
                else:
                    lo = self.lower.get(n)
                    if lo is None or self.value[n] > lo:
                        pick = n
                        break
            if pick is None:
                return False
            self._pivot_and_update(b, pick, target)

    def model(self) -> dict[str, Fraction]:
        """Concrete rational model; only valid right after a successful check()."""
        delta = Fraction(1)
        for x, v in self.value.items():
            for bound, is_lower in ((self.lower.get(x), True), (self.upper.get(x), False)):
                if bound is None:
                    continue
                lo, hi = (bound, v) if is_lower else (v, bound)
                # need lo[0] + lo[1]*d <= hi[0] + hi[1]*d
                if lo[0] < hi[0] and lo[1] > hi[1]:
                    delta = min(delta, (hi[0] - lo[0]) / (lo[1] - hi[1]))
        out = {}
        for name, i in self.index.items():
            c, k = self.value[i]
            out[name] = c + k * delta
        return out


def check_consistent(constraints: Iterable[LinearConstraint]) -> LraResult:
    s = LraSolver()
    for c in constraints:
        s.add(c)
    if s.check():
        return LraResult("sat", s.model())
    return LraResult("unsat")


def check_incremental(solver: LraSolver, constraints: Iterable[LinearConstraint]) -> LraResult:
    """Push a scope, add constraints, check, and pop again."""
    solver.push()
    try:
        for c in constraints:
            solver.add(c)
        if solver.check():
            return LraResult("sat", solver.model())
        return LraResult("unsat")
    finally:
        solver.pop()


def satisfies(model, constraints: Iterable[LinearConstraint]) -> bool:
    return all(c.holds(model) for c in constraints)


__all__ = ["LraSolver", "LraResult", "ConstraintSet", "check_consistent", "check_incremental", "satisfies", "GT", "GE", "EQ"]
