"""Tolerance sweeps over the symmetric and corner-peak suite members.

Runs the schedule 1e-3, 2e-4, ... for each integrand, stopping a sweep at
the first level where fewer than half of the runs converge, then prints
box-plot statistics of the achieved relative error per level.

    python3 scripts/accuracy_sweep.py --runs 100 --out sweep.csv
"""

import argparse
import csv
import sys

from mcubes.bench import HEADER, SUMMARY_HEADER, format_row, run_sweep, summarize, _fmt
from mcubes.integrands import make_suite_integrand

CASES = [(2, 6), (3, 3), (4, 8), (5, 8)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--maxcalls", type=float, default=1e5)
    ap.add_argument("--calls-growth", type=float, default=2.0)
    ap.add_argument("--itmax", type=int, default=40)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out", default="sweep.csv")
    args = ap.parse_args(argv)

    rows = []
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)

        def emit(rec):
            row = format_row(rec)
            w.writerow(row)
            fh.flush()
            rows.append(dict(zip(HEADER, row)))

        for family, d in CASES:
            run_sweep(make_suite_integrand(family, d), args.runs, maxcalls=int(args.maxcalls),
                      itmax=args.itmax, calls_growth=args.calls_growth, writer=emit, workers=args.workers)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(SUMMARY_HEADER)
    for row in summarize(rows):
        out.writerow([_fmt(v) for v in row])


if __name__ == "__main__":
    main()
