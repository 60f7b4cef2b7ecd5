#!/usr/bin/env python3
"""Run the standard benchmark grid and print one row per setting.

For each chain length and each entry of the nine-setting options menu,
compile the clean family-chain KB and answer its declared query, then
report the counters and the median wall time of three warm runs.
Optionally also reports the hash-vs-list ancestor-structure comparison
on the long-chain KB family.

Usage:
    python scripts/run_benchmarks.py [--sizes 10,100,1000] [--chains]
"""

import argparse
import statistics
import time

from horndl import Engine, Options, compile_program
from horndl.generators import alcoholic, iocaste_clean
from horndl.model import Const, PredName, Unary

MENU = {
    "base": Options(),
    "g": Options(ground_optim=False),
    "p": Options(projection=False),
    "f": Options(filtering=False),
    "i": Options(indexing=False),
    "o": Options(orphan="general"),
    "d": Options(decompose=False),
    "pd": Options(projection=False, decompose=False),
    "od": Options(orphan="general", decompose=False),
}


def timed_query(compiled, goals, runs=3):
    result = Engine(compiled).query(goals)  # warm-up
    times = []
    for _ in range(runs):
        engine = Engine(compiled)
        t0 = time.perf_counter()
        result = engine.query(goals)
        times.append((time.perf_counter() - t0) * 1000.0)
    return result, statistics.median(times)


def run_menu(sizes):
    print(f"{'setting':8s} {'n':>6s} {'answers':12s} {'loop':>8s} "
          f"{'ancres':>8s} {'orphancres':>10s} {'ms':>10s}")
    for n in sizes:
        kb = iocaste_clean(n)
        for name, options in MENU.items():
            compiled = compile_program(kb, options)
            result, ms = timed_query(compiled, kb.queries[0])
            answers = ",".join(a[0] for a in result.answers)
            s = result.stats
            print(f"{name:8s} {n:6d} {answers:12s} {s.loop_elims:8d} "
                  f"{s.ancres:8d} {s.orphan_ancres:10d} {ms:10.2f}")


def run_chains(n=2000):
    goal = [Unary(PredName("alcoholic", True, 1), Const("i1"))]
    kb = alcoholic(n)
    for name, options in (("hash", Options()), ("list", Options(hashing=False))):
        compiled = compile_program(kb, options)
        result, ms = timed_query(compiled, goal)
        verdict = "derived" if result.answers else "open"
        print(f"alcoholic({n}) {name:4s} ~alcoholic(i1)={verdict} {ms:10.2f} ms")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="10,100,1000",
                    help="comma-separated chain lengths (default 10,100,1000)")
    ap.add_argument("--chains", action="store_true",
                    help="also run the hash-vs-list comparison")
    args = ap.parse_args()
    run_menu([int(s) for s in args.sizes.split(",")])
    if args.chains:
        run_chains()


if __name__ == "__main__":
    main()
