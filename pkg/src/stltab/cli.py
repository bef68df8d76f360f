"""Command-line front end: check, bench, emit-smt, oracle."""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

from . import oracle, smt_export, witness
from .formula import Formula, ParseError, conjoin, parse
from .tableau import TOGGLES, Options, solve, write_dot

EXIT_SAT, EXIT_UNSAT, EXIT_USAGE, EXIT_TIMEOUT = 0, 1, 2, 3

FLAG_NAMES = {
    "jump": "--no-jump",
    "gf_rules": "--no-gf-rules",
    "implication_rule": "--no-implication-rule",
    "gf_unrolling": "--no-gf-unroll",
    "merge_redundant": "--no-merge",
    "interval_shift": "--no-shift",
    "early_check": "--no-early-check",
    "memoization": "--no-memo",
    "easy_first": "--no-easy-first",
}

CSV_HEADER = ["name", "result", "time_s", "nodes", "poised", "jumps", "memo_hits", "lra_calls", "options"]


def split_requirements(text: str) -> list[tuple[int, str]]:
    """One formula per line; a formula continues while its parentheses are open."""
    out, buf, start, depth = [], [], 0, 0
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip() and not buf:
            continue
        if not buf:
            start = n
        buf.append(line)
        depth += line.count("(") - line.count(")") + line.count("[") - line.count("]")
        if depth <= 0:
            out.append((start, "\n".join(buf)))
            buf, depth = [], 0
    if buf:
        out.append((start, "\n".join(buf)))
    return out


def read_requirements(path: str | Path, fmt: str = "stl") -> Formula:
    text = Path(path).read_text()
    parts = []
    for line, chunk in split_requirements(text):
        try:
            f = parse(chunk)
        except ParseError as e:
            raise ParseError(e.message, e.line + line - 1, e.column) from None
        if fmt == "mltl" and not oracle.is_boolean_encoded(f):
            raise ParseError("mltl input may only use Boolean propositions", line, 1)
        parts.append(f)
    if not parts:
        raise ParseError("no formula found", 1, 1)
    return conjoin(parts)


def _options(args, **extra) -> Options:
    kw = {t: not getattr(args, "no_" + t) for t in TOGGLES}
    return Options(timeout_seconds=args.timeout, trace=bool(getattr(args, "trace", None)), **kw, **extra)


def _add_toggles(p):
    for toggle, flag in FLAG_NAMES.items():
        p.add_argument(flag, dest="no_" + toggle, action="store_true", help=f"disable {toggle.replace('_', ' ')}")


def cmd_check(args) -> int:
    f = read_requirements(args.file, args.format)
    opts = _options(args)
    v = solve(f, opts)
    print(v.status)
    s = v.stats
    print(f"nodes={s.nodes} poised={s.poised} jumps={s.jumps} memo_hits={s.memo_hits} lra_calls={s.lra_calls}", file=sys.stderr)
    if args.trace and v.trace is not None:
        with open(args.trace, "w") as fh:
            write_dot(v.trace, fh)
    if v.status == "sat" and args.witness:
        sig = witness.reconstruct(v.branch, f).extended(v.horizon + 1)
        fmt = "json" if args.witness.endswith(".json") else "csv"
        with open(args.witness, "w") as fh:
            witness.write_trace(sig, fh, fmt)
    return {"sat": EXIT_SAT, "unsat": EXIT_UNSAT}.get(v.status, EXIT_TIMEOUT)


def bench_files(directory: str | Path) -> list[Path]:
    d = Path(directory)
    return sorted(p for p in d.iterdir() if p.suffix in (".stl", ".mltl") and p.is_file())


def run_benchmark(path: Path, opts: Options) -> dict:
    row = {"name": path.stem, "options": opts.fingerprint()}
    start = time.monotonic()
    try:
        f = read_requirements(path, "mltl" if path.suffix == ".mltl" else "stl")
        v = solve(f, opts)
    except (ParseError, ValueError) as e:
        row.update(result="error", time_s=f"{time.monotonic() - start:.3f}")
        row.update({k: "" for k in ("nodes", "poised", "jumps", "memo_hits", "lra_calls")})
        row["error"] = str(e)
        return row
    row.update(result=v.status, time_s=f"{time.monotonic() - start:.3f}")
    row.update(nodes=v.stats.nodes, poised=v.stats.poised, jumps=v.stats.jumps, memo_hits=v.stats.memo_hits, lra_calls=v.stats.lra_calls)
    return row


def cmd_bench(args) -> int:
    base = _options(args)
    configs = [base]
    if args.ablate:
        configs += [base.without(t) for t in TOGGLES if getattr(base, t)]
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    w = csv.DictWriter(out, fieldnames=CSV_HEADER, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for path in bench_files(args.dir):
        for opts in configs:
            w.writerow(run_benchmark(path, opts))
            out.flush()
    if out is not sys.stdout:
        out.close()
    return 0


def cmd_emit_smt(args) -> int:
    f = read_requirements(args.file, args.format)
    text = smt_export.emit_smtlib(f)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_oracle(args) -> int:
    f = read_requirements(args.file, args.format)
    try:
        res = oracle.brute_force_check(f, cap=args.oracle_cap)
    except oracle.OracleCapExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    print(res.status)
    return EXIT_SAT if res.sat else EXIT_UNSAT


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stltab", description="Satisfiability checking for bounded discrete-time STL.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_toggles=True):
        p.add_argument("--format", choices=("stl", "mltl"), default="stl")
        p.add_argument("--timeout", type=float, default=120.0, help="seconds per formula")
        if with_toggles:
            _add_toggles(p)

    p = sub.add_parser("check", help="check a formula or requirement set")
    p.add_argument("file")
    common(p)
    p.add_argument("--witness", help="write a satisfying signal (.csv or .json)")
    p.add_argument("--trace", help="write the explored tableau as a DOT graph")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("bench", help="run every .stl/.mltl file in a directory")
    p.add_argument("dir")
    common(p)
    p.add_argument("--ablate", action="store_true", help="also run with each optimization disabled")
    p.add_argument("--output", "-o", help="CSV destination (default stdout)")
    p.set_defaults(run=cmd_bench)

    p = sub.add_parser("emit-smt", help="print the SMT-LIB2 encoding")
    p.add_argument("file")
    common(p, with_toggles=False)
    p.add_argument("--output", "-o")
    p.set_defaults(run=cmd_emit_smt)

    p = sub.add_parser("oracle", help="brute-force verdict for small horizons")
    p.add_argument("file")
    common(p, with_toggles=False)
    p.add_argument("--oracle-cap", type=int, default=oracle.DEFAULT_CAP)
    p.set_defaults(run=cmd_oracle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0
    try:
        return args.run(args)
    except ParseError as e:
        print(f"{args.file if hasattr(args, 'file') else args.dir}:{e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
