"""Satisfying signals recovered from accepted branches."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction

from .formula import Formula, variables
from .lra import check_consistent


@dataclass
class Signal:
    length: int
    values: list[dict[str, Fraction]]

    @property
    def names(self) -> list[str]:
        return sorted({v for row in self.values for v in row})

    def extended(self, length: int) -> Signal:
        """Pad with the default value up to length (the tail is unconstrained)."""
        if length <= self.length:
            return self
        names = self.names
        rows = self.values + [{v: Fraction(0) for v in names} for _ in range(length - self.length)]
        return Signal(length, rows)


def _poised_nodes(branch):
    out = []
    for u, nxt in zip(branch, branch[1:]):
        if nxt.rule in ("STEP", "JUMP"):
            out.append(u)
    out.append(branch[-1])
    return out


def reconstruct(branch, root: Formula | None = None) -> Signal:
    """Signal from an accepted branch; skipped instants repeat the pre-jump model."""
    if not branch:
        raise ValueError("empty branch")
    names = set()
    for f in (root,) if root is not None else branch[0].label:
        names |= variables(f)
    models = {}
    for u in _poised_nodes(branch):
        res = check_consistent(u.atoms())
        if not res.sat:
            raise AssertionError(f"inconsistent poised node on an accepted branch: {u!r}")
        models[u.time] = res.model
        names |= set(res.model)
    length = 1 + max(models)
    rows = []
    last: dict = {}
    for t in range(length):
        if t in models:
            last = models[t]
        rows.append({v: Fraction(last.get(v, 0)) for v in sorted(names)})
    return Signal(length, rows)


def format_value(q: Fraction) -> str:
    """Decimal when exact, p/q otherwise."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{q.numerator}/{q.denominator}"
    digits = max(twos, fives)
    scaled = q * 10**digits
    sign = "-" if scaled < 0 else ""
    n = abs(scaled.numerator)
    whole, frac = divmod(n, 10**digits)
    return f"{sign}{whole}.{str(frac).rjust(digits, '0')}"


def write_trace(s: Signal, sink=None, fmt: str = "csv") -> str:
    names = s.names
    if fmt == "json":
        text = json.dumps(
            {
                "length": s.length,
                "vars": names,
                "rows": [[format_value(row[v]) for v in names] for row in s.values],
            }
        )
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time"] + names)
        for t, row in enumerate(s.values):
            w.writerow([t] + [format_value(row[v]) for v in names])
        text = buf.getvalue().rstrip("\n")
    if sink is not None:
        sink.write(text + "\n")
    return text
