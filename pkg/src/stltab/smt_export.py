"""SMT-LIB2 (QF_LRA) encoding of the ground expansion of a formula."""

from __future__ import annotations

from fractions import Fraction

from .formula import EQ, GE, GT, NEQ, Formula, LinearConstraint, horizon, variables
from .oracle import GAnd, GAtom, GConst, GImplies, GNot, GOr, ground_expand


def smt_number(q: Fraction) -> str:
    q = Fraction(q)
    if q < 0:
        return f"(- {smt_number(-q)})"
    if q.denominator == 1:
        return str(q.numerator)
    return f"(/ {q.numerator} {q.denominator})"


def smt_symbol(var: str, t: int) -> str:
    name = f"{var}_{t}"
    if all(ch.isalnum() or ch in "_.$" for ch in name) and not name[0].isdigit():
        return name
    return "|" + name.replace("|", "_") + "|"


def _lhs(c: LinearConstraint, t: int) -> str:
    parts = []
    for v, k in c.terms:
        sym = smt_symbol(v, t)
        parts.append(sym if k == 1 else f"(* {smt_number(k)} {sym})")
    if not parts:
        return "0"
    return parts[0] if len(parts) == 1 else "(+ " + " ".join(parts) + ")"


def _atom(c: LinearConstraint, t: int) -> str:
    lhs, rhs = _lhs(c, t), smt_number(c.bound)
    match c.rel:
        case ">":
            return f"(> {lhs} {rhs})"
        case ">=":
            return f"(>= {lhs} {rhs})"
        case "==":
            return f"(= {lhs} {rhs})"
        case "!=":
            return f"(not (= {lhs} {rhs}))"
    raise ValueError(c.rel)


def smt_term(g) -> str:
    match g:
        case GConst(value=v):
            return "true" if v else "false"
        case GAtom(constraint=c, time=t):
            return _atom(c, t)
        case GNot(arg=a):
            return f"(not {smt_term(a)})"
        case GAnd(args=args):
            return "(and " + " ".join(smt_term(a) for a in args) + ")"
        case GOr(args=args):
            return "(or " + " ".join(smt_term(a) for a in args) + ")"
        case GImplies(left=l, right=r):
            return f"(=> {smt_term(l)} {smt_term(r)})"
    raise TypeError(g)


def emit_smtlib(f: Formula) -> str:
    h = horizon(f)
    lines = ["(set-logic QF_LRA)"]
    for v in sorted(variables(f)):
        for t in range(h + 1):
            lines.append(f"(declare-const {smt_symbol(v, t)} Real)")
    lines.append(f"(assert {smt_term(ground_expand(f, h))})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
