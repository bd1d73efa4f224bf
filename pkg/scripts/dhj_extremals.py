#!/usr/bin/env python3
"""Tabulate extremal line-free sizes and line counts for small parameters."""
from __future__ import annotations

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ergolab.hales_jewett import enumerate_lines, max_line_free


def main() -> int:
    print("k  N  points  lines  max line-free  exhaustive  seconds")
    for k in (2, 3):
        for N in (1, 2, 3, 4):
            if k**N > 100:
                continue
            start = time.perf_counter()
            res = max_line_free(k, N)
            elapsed = time.perf_counter() - start
            lines = len(enumerate_lines(k, N))
            print(
                f"{k}  {N}  {k**N:6d}  {lines:5d}  {res.size:13d}  "
                f"{str(res.exhaustive):10s}  {elapsed:.2f}"
            )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
