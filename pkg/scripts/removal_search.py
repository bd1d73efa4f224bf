#!/usr/bin/env python3
"""Run the removal counterexample search and report timing.

Usage: removal_search.py [--random] [--samples N] [--sizes 2,3,4] [--seed S]

Exhaustive mode sweeps the full documented instance domain for the given
point counts; random mode samples valid instances.  Finding anything is a
release blocker, so the expected output is always "none".
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ergolab.removal import SearchConfig, search_counterexample
from ergolab.serialize import canonical_dumps, removal_instance_to_json


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--random", action="store_true")
    parser.add_argument("--samples", type=int, default=1000)
    parser.add_argument("--sizes", default="2")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("-d", type=int, default=3)
    args = parser.parse_args()

    config = SearchConfig(
        sizes=tuple(int(s) for s in args.sizes.split(",")),
        d=args.d,
        seed=args.seed,
        exhaustive=not args.random,
        samples=args.samples,
    )
    start = time.perf_counter()
    hit = search_counterexample(config)
    elapsed = time.perf_counter() - start
    mode = "exhaustive" if config.exhaustive else f"random x{config.samples}"
    if hit is None:
        print(f"no counterexample ({mode}, sizes {config.sizes}, {elapsed:.1f}s)")
        return 0 if config.exhaustive else 2
    print("COUNTEREXAMPLE FOUND (release blocker):")
    print(canonical_dumps(removal_instance_to_json(hit)))
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
