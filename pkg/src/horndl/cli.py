"""Command-line driver: compile, query, benchmark, and generate KBs.

Subcommands::

    horndl compile KB [--emit] [option flags]
    horndl query KB "Ans(X)" [option flags] [--abox-csv FILE]
    horndl bench SPEC [--query "Ans(X)"] [option flags]
    horndl gen SPEC

Option flags mirror the seven compilation parameters; the flag names
negate the defaults (``--no-projection`` etc., ``--orphan general``).
Query solutions are printed one tuple per line, sorted, followed by the
counters as ``key=value`` lines.  A global step limit can be imposed via
the environment variable named by ``horndl.STEP_LIMIT_ENV``.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time

from .engine import Engine, QueryResult
from .generators import generate
from .parser import ingest_abox_csv, parse_kb, parse_query
from .plan import Options, compile_program, emit_readable


def _add_option_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--no-decompose", action="store_true", help="disable body decomposition")
    sub.add_argument("--no-indexing", action="store_true", help="disable inverted role indexes")
    sub.add_argument("--no-projection", action="store_true", help="disable projection/supersets")
    sub.add_argument("--no-filtering", action="store_true", help="disable clause filtering")
    sub.add_argument("--no-ground-optim", action="store_true", help="disable det/nondet splitting")
    sub.add_argument(
        "--orphan",
        choices=("first", "general"),
        default="first",
        help="rank orphan goals first (default) or like general goals",
    )
    sub.add_argument("--no-hashing", action="store_true", help="use linear ancestor lists")


def _options_of(args: argparse.Namespace) -> Options:
    return Options(
        decompose=not args.no_decompose,
        indexing=not args.no_indexing,
        projection=not args.no_projection,
        filtering=not args.no_filtering,
        ground_optim=not args.no_ground_optim,
        orphan=args.orphan,
        hashing=not args.no_hashing,
    )


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _print_result(result: QueryResult) -> None:
    for row in result.answers:
        print(", ".join(row) if row else "true")
    for line in result.stats.to_lines():
        print(line)


def _cmd_compile(args: argparse.Namespace) -> int:
    kb = parse_kb(_read(args.kb))
    compiled = compile_program(kb, _options_of(args))
    if args.emit:
        sys.stdout.write(emit_readable(compiled))
    else:
        print(f"predicates={len(compiled.preds)}")
        print(f"facts={len(compiled.abox_facts)}")
    return 0


def _cmd_query(args: argparse.Namespace) -> int:
    kb = parse_kb(_read(args.kb))
    goals = parse_query(args.query)
    extra = ingest_abox_csv(args.abox_csv) if args.abox_csv else ()
    compiled = compile_program(kb, _options_of(args), extra_facts=extra)
    result = Engine(compiled).query(goals)
    _print_result(result)
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    text = generate(args.spec)
    t0 = time.perf_counter()
    kb = parse_kb(text)
    t_load = time.perf_counter() - t0
    if args.query:
        goals = parse_query(args.query)
    elif kb.queries:
        goals = kb.queries[0]
    else:
        print("error: no query declared and none supplied via --query", file=sys.stderr)
        return 1
    t0 = time.perf_counter()
    compiled = compile_program(kb, _options_of(args))
    t_compile = time.perf_counter() - t0
    # one warm-up run, then the median of three timed runs
    result = Engine(compiled).query(goals)
    runs = []
    for _ in range(3):
        engine = Engine(compiled)
        t0 = time.perf_counter()
        result = engine.query(goals)
        runs.append((time.perf_counter() - t0) * 1000.0)
    _print_result(result)
    print(f"load_ms={t_load * 1000.0:.3f}")
    print(f"compile_ms={t_compile * 1000.0:.3f}")
    print(f"query_ms={statistics.median(runs):.3f}")
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    sys.stdout.write(generate(args.spec))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="horndl",
        description="Compile DL-clause knowledge bases and run instance-retrieval queries.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_compile = subs.add_parser("compile", help="compile a KB file and summarise or emit the plan")
    p_compile.add_argument("kb", help="path to a KB file")
    p_compile.add_argument("--emit", action="store_true", help="print the readable compiled program")
    _add_option_flags(p_compile)
    p_compile.set_defaults(fn=_cmd_compile)

    p_query = subs.add_parser("query", help="answer a conjunctive query over a KB file")
    p_query.add_argument("kb", help="path to a KB file")
    p_query.add_argument("query", help='conjunctive query, e.g. "Ans(X)"')
    p_query.add_argument("--abox-csv", help="CSV file with extra ABox assertions")
    _add_option_flags(p_query)
    p_query.set_defaults(fn=_cmd_query)

    p_bench = subs.add_parser("bench", help="generate a KB family instance and time its query")
    p_bench.add_argument("spec", help="generator spec, e.g. iocaste_clean(100)")
    p_bench.add_argument("--query", help="query text; defaults to the KB's declared query")
    _add_option_flags(p_bench)
    p_bench.set_defaults(fn=_cmd_bench)

    p_gen = subs.add_parser("gen", help="print a generated KB in the textual format")
    p_gen.add_argument("spec", help="generator spec, e.g. alcoholic(100)")
    p_gen.set_defaults(fn=_cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except Exception as exc:  # surface a clean diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
