"""Command-line entry point ``lsta-verify``."""

from __future__ import annotations

import argparse
import os
import shlex
import sys

from ..errors import LstaVerifyError
from ..lsta import sorted_language
from ..smt import DEFAULT_TIMEOUT, SOLVER_ENV, Solver
from ..verifier import VerificationTask, verify
from .benchmarks import KINDS, generate_benchmark
from .constraint import parse_constraint
from .lsta_format import parse_lsta
from .program import load_program


def _read(path: str | None) -> str:
    if path is None:
        return ""
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _cmd_verify(args) -> int:
    pre = parse_lsta(_read(args.pre), parse_constraint(_read(args.pre_smt)))
    post = parse_lsta(_read(args.post), parse_constraint(_read(args.post_smt)))
    program = load_program(args.program)
    command = os.environ.get(SOLVER_ENV) or args.solver
    solver = Solver(shlex.split(command) if command else None, timeout=args.timeout)
    result = verify(VerificationTask(pre, post, program), solver)
    if args.json:
        print(result.to_json(timing=not args.no_timing))
    else:
        print(result.summary())
    return result.verdict.exit_code


def _cmd_gen(args) -> int:
    bundle = generate_benchmark(args.kind, args.n)
    for path in bundle.write(args.out):
        print(path)
    return 0


def _cmd_lang(args) -> int:
    a = parse_lsta(_read(args.lsta))
    for tree in sorted_language(a, args.limit):
        print(tree)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lsta-verify", description="Verify quantum programs with tree automata.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="check a {pre} program {post} triple")
    v.add_argument("--program", required=True)
    v.add_argument("--pre", required=True)
    v.add_argument("--pre-smt")
    v.add_argument("--post", required=True)
    v.add_argument("--post-smt")
    v.add_argument("--solver", help=f"solver command line (overridden by ${SOLVER_ENV})")
    v.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="seconds per solver query")
    v.add_argument("--json", action="store_true", help="print the obligation report as JSON")
    v.add_argument("--no-timing", action="store_true", help="omit timing fields from the JSON report")
    v.set_defaults(func=_cmd_verify)

    g = sub.add_parser("gen", help="write a benchmark bundle")
    g.add_argument("--kind", required=True, choices=KINDS)
    g.add_argument("--n", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    lang = sub.add_parser("lang", help="enumerate the trees of an automaton")
    lang.add_argument("--lsta", required=True)
    lang.add_argument("--limit", type=int, default=1000)
    lang.set_defaults(func=_cmd_lang)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (LstaVerifyError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
