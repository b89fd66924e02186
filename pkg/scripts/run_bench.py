"""Sweep the synthetic suites with both solvers and write one CSV per suite.

    python3 scripts/run_bench.py --out results/ --timeout 120
    python3 scripts/run_bench.py --suites t1 --max-size 16 --methods amc3
"""
import argparse
import logging
from pathlib import Path

from dtpasp import bench

# size ranges that stay within a few minutes per suite with enumeration
DEFAULT_GRID = {
    "t1": [(2, d) for d in range(1, 15)],
    "t2": [(n, 2) for n in range(1, 15)],
    "t3": [(k, k) for k in range(1, 9)],
    "t4": [(k, k) for k in range(1, 9)],
    "t5": [(k, k) for k in range(1, 9)],
    "t6": [(k, k) for k in range(1, 9)],
}


def _point(suite, k):
    if suite == "t1":
        return 2, k
    if suite == "t2":
        return k, 2
    return k, k


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--suites", nargs="+", default=list(bench.SUITES), choices=bench.SUITES)
    ap.add_argument("--methods", nargs="+", default=["enum", "amc3"])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--max-size", type=int, default=None,
                    help="override the largest size (d for t1, n for t2, k otherwise)")
    ap.add_argument("--timeout", type=float, default=120.0)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    args.out.mkdir(parents=True, exist_ok=True)

    for suite in args.suites:
        grid = DEFAULT_GRID[suite]
        if args.max_size:
            grid = [_point(suite, k) for k in range(1, args.max_size + 1)]
        results = []
        for method in args.methods:
            timed_out = False
            for n, d in grid:
                for seed in args.seeds:
                    if timed_out:  # larger sizes will not finish either
                        continue
                    r = bench.run(bench.BenchSpec(suite, n, d, seed), method, args.timeout,
                                  raise_errors=False)
                    logging.info("%s n=%d d=%d %s: %.3f s %s", suite, n, d, method,
                                 r.wall_time_seconds, r.error or "")
                    results.append(r)
                    timed_out = r.error is not None and "timed out" in r.error
        path = args.out / f"{suite}.csv"
        with open(path, "w", newline="", encoding="utf-8") as f:
            bench.write_csv(results, f)
        logging.info("wrote %s", path)


if __name__ == "__main__":
    main()
