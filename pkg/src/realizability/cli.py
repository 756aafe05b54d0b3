"""Batch command-line interface.

Exit status: 0 success, 1 contract or check failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import catalogue as cat
from .compiler import CompileError, compile_lambda, format_cterm, parse_lambda
from .logic import DerivationError, check, extract_and_smoke, format_formula, parse_derivation_file
from .machine import describe_status, run, trace_lines
from .semantics import (
    Refuted, TruthQuery, load_pole, load_query, load_universe, query_formula, realizes, truth_table,
)
from .terms import EncodingTooLarge, ParseError, decode, encode, format_process, format_term, parse_process, parse_term
from .threads import run_thread, thread_status_line

DEFAULT_BUDGET = 10_000


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_json(path: str) -> dict:
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not valid JSON ({exc.msg})") from None


def _emit(args, record: dict, human: str) -> None:
    print(json.dumps(record, sort_keys=True) if args.format == "records" else human)


def cmd_compile(args) -> int:
    text = args.expr if args.expr is not None else _read(args.path)
    ct = compile_lambda(parse_lambda(text.strip(), cat._ENV))
    _emit(args, {"source": text.strip(), "term": format_cterm(ct)}, format_cterm(ct))
    return 0


def cmd_run(args) -> int:
    report = run(parse_process(args.process), args.budget, args.cycles == "on")
    mode = "records" if args.format == "records" else "human"
    for line in trace_lines(report, mode, args.limit):
        print(line)
    _emit(args, {"status": describe_status(report.status), "steps": report.steps},
          f"status: {describe_status(report.status)}")
    return 0


def cmd_check(args) -> int:
    hyps, d = parse_derivation_file(_read(args.path))
    try:
        ct = check(d, hyps)
    except DerivationError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    out = {"conclusion": format_formula(d.concl), "term": format_cterm(ct)}
    status = 0
    if args.universe or args.pole:
        query = TruthQuery(load_pole(_load_json(args.pole) if args.pole else {}),
                           load_universe(_load_json(args.universe) if args.universe else {}))
        _, verdict = extract_and_smoke(d, query, hyps)
        out["smoke"] = repr(verdict)
        status = 1 if isinstance(verdict, Refuted) else 0
    _emit(args, out, "\n".join(str(v) for k, v in out.items() if k != "conclusion"))
    return status


def _range(text: str) -> range:
    try:
        if ":" in text:
            lo, hi = text.split(":", 1)
            return range(int(lo or 0), int(hi))
        return range(int(text))
    except ValueError:
        raise UsageError(f"bad thread range {text!r}; use N or LO:HI") from None


def cmd_threads(args) -> int:
    mode = "records" if args.format == "records" else "human"
    for n in _range(args.range):
        r = run_thread(n, args.budget, args.cycles == "on")
        print(thread_status_line(r, mode))
        if args.trace_dir:
            out = Path(args.trace_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"thread_{n}.trace").write_text("\n".join(trace_lines(r.run, mode)) + "\n")
    return 0


def cmd_catalogue(args) -> int:
    if args.name == "list":
        for n in cat.names():
            e = cat.get(n)
            _emit(args, {"name": n, "source": e.source, "anchor": e.anchor},
                  f"{n}\t{e.source}\t{e.anchor}")
        return 0
    try:
        wanted = cat.names() if args.name == "all" else [cat.get(args.name).name]
    except cat.UnknownEntry as exc:
        raise UsageError(exc.args[0]) from None
    budget = args.budget if args.budget_given else None
    ok = True
    for n in wanted:
        e, rep = cat.get(n), cat.run_contracts(n, budget)
        ok &= rep.passed
        if args.format != "records":
            print(f"{n}: {e.source}\n  term: {format_term(e.term, 400)}")
        for c, r in zip(e.contracts, rep.results):
            target = cat.format_named(c.expected) if c.expected is not None else f"cycle of period {c.period}"
            _emit(args, {"entry": n, "contract": r.description, "passed": r.passed,
                         "steps": r.steps, "expected": target, "budget": budget or c.budget},
                  f"  [{'ok' if r.passed else 'FAIL'}] {cat.format_named(c.start)} > {target}"
                  f"  ({r.detail})")
    return 0 if ok else 1


def cmd_encode(args) -> int:
    t = parse_term(args.term)
    _emit(args, {"term": format_term(t), "code": encode(t)}, str(encode(t)))
    return 0


def cmd_decode(args) -> int:
    try:
        n = int(args.code)
    except ValueError:
        raise UsageError(f"not a natural number: {args.code!r}") from None
    if n < 0:
        raise UsageError("codes are natural numbers")
    t = decode(n)
    _emit(args, {"code": n, "term": format_term(t)}, format_term(t))
    return 0


def cmd_semantics(args) -> int:
    spec = _load_json(args.query)
    if args.universe:
        spec["universe"] = _load_json(args.universe)
    if args.pole:
        spec["pole"] = _load_json(args.pole)
    query, env = load_query(spec)
    for text in spec.get("formulas", []):
        f = query_formula(text, env)
        for rec in truth_table(f, query):
            _emit(args, json.loads(rec.to_json()), f"{rec.stack}\t{rec.verdict}\t{rec.formula}")
    status = 0
    for item in spec.get("realizers", []):
        t, f = parse_term(item["term"]), query_formula(item["formula"], env)
        verdict = realizes(t, f, query)
        if isinstance(verdict, Refuted) and item.get("expect", "unrefuted") == "unrefuted":
            status = 1
        _emit(args, {"term": format_term(t), "formula": format_formula(f), "verdict": repr(verdict)},
              f"{format_term(t)} ||- {format_formula(f)}: {verdict!r}")
    return status


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", type=int, default=None, help="step budget (default 10^4)")
    common.add_argument("--format", choices=("human", "records"), default="human")
    common.add_argument("--cycles", choices=("on", "off"), default="on")
    common.add_argument("--universe", help="JSON stack universe specification")
    common.add_argument("--pole", help="JSON pole specification")

    p = argparse.ArgumentParser(prog="realizability", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("compile", parents=[common], help="compile a lambda term to combinators")
    s.add_argument("path", nargs="?", default="-")
    s.add_argument("-e", "--expr", help="lambda text given inline")
    s.set_defaults(fn=cmd_compile)

    s = sub.add_parser("run", parents=[common], help="execute a process")
    s.add_argument("process")
    s.add_argument("--limit", type=int, default=None, help="truncate printed terms")
    s.set_defaults(fn=cmd_run)

    s = sub.add_parser("check", parents=[common], help="check a derivation file and extract its term")
    s.add_argument("path")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("threads", parents=[common], help="run threads N or LO:HI")
    s.add_argument("range")
    s.add_argument("--trace-dir", help="write one full trace file per thread")
    s.set_defaults(fn=cmd_threads)

    s = sub.add_parser("catalogue", parents=[common], help="replay catalogue contracts (NAME, all, list)")
    s.add_argument("name")
    s.set_defaults(fn=cmd_catalogue)

    s = sub.add_parser("encode", parents=[common], help="code of a term")
    s.add_argument("term")
    s.set_defaults(fn=cmd_encode)

    s = sub.add_parser("decode", parents=[common], help="term with a given code")
    s.add_argument("code")
    s.set_defaults(fn=cmd_decode)

    s = sub.add_parser("semantics", parents=[common], help="evaluate a JSON query file")
    s.add_argument("query")
    s.set_defaults(fn=cmd_semantics)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.budget_given = args.budget is not None
    if args.budget is None:
        args.budget = DEFAULT_BUDGET
    if args.budget < 0:
        parser.error("--budget must be non-negative")
    try:
        return args.fn(args)
    except (UsageError, ParseError, CompileError, EncodingTooLarge, ValueError, KeyError) as exc:
        print(f"{parser.prog} {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
