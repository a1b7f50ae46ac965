#!/usr/bin/env python3
"""Regenerate the three RA/BRA comparison tables at a chosen replicate count.

Prints one aligned table per protocol.  At the default 200 replicates the
cell means are stable to roughly a factor-of-three band around the values
obtained with 10,000 replicates; pass --replicates 10000 to reproduce the
reference scale (slow).
"""

import argparse
import sys
import time

from blockra.bench import run_table_benchmark


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replicates", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--tables", nargs="+", default=["tcomp", "t1b", "t3b"],
                        choices=["tcomp", "t1b", "t3b"])
    args = parser.parse_args()

    for table in args.tables:
        t0 = time.time()
        report = run_table_benchmark(table, replicates=args.replicates,
                                     rng_seed=args.seed, jobs=args.jobs)
        dt = time.time() - t0
        print(f"\n{table}  ({args.replicates} replicates, seed {args.seed}, {dt:.0f}s)")
        if table == "t1b":
            print(f"{'cell':>10} {'gap RA':>12} {'gap BRA':>12} {'se RA':>10} {'se BRA':>10}")
            for c in report.cells:
                print(f"({c.m:>3},{c.n:>2}) {c.mean_gap_ra:>12.3e} {c.mean_gap_bra:>12.3e} "
                      f"{c.se_gap_ra:>10.1e} {c.se_gap_bra:>10.1e}")
        else:
            print(f"{'cell':>10} {'V RA':>12} {'V BRA':>12} {'se RA':>10} {'se BRA':>10}")
            for c in report.cells:
                print(f"({c.m:>3},{c.n:>2}) {c.mean_v_ra:>12.3e} {c.mean_v_bra:>12.3e} "
                      f"{c.se_v_ra:>10.1e} {c.se_v_bra:>10.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
