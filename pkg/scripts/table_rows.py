"""Seeded fA / fB runs with a coverage summary, written as CSV.

    python3 scripts/table_rows.py --runs 20 --out table_rows.csv
"""

import argparse
import csv
import statistics
import sys

from mcubes.bench import HEADER, format_row, run_once
from mcubes.driver import RunConfig
from mcubes.integrands import make_fA, make_fB

# (maxcalls, itmax) per integrand
SETTINGS = {"fA": (2_000_000, 10), "fB": (2_000_000, 15)}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--tau-rel", type=float, default=1e-3)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out")
    args = ap.parse_args(argv)

    stream = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(HEADER)
    for f in (make_fA(), make_fB()):
        maxcalls, itmax = SETTINGS[f.name]
        recs = []
        for run in range(args.runs):
            cfg = RunConfig(d=f.dim, maxcalls=maxcalls, itmax=itmax, tau_rel=args.tau_rel, seed=run,
                            workers=args.workers)
            rec = run_once(f, cfg, run)
            w.writerow(format_row(rec))
            stream.flush()
            recs.append(rec)
        covered = sum(abs(r.estimate - r.true_value) <= 3 * r.error for r in recs)
        print(f"{f.name}: median estimate {statistics.median(r.estimate for r in recs):.8g}, "
              f"median sigma {statistics.median(r.error for r in recs):.4g}, "
              f"within 3 sigma {covered}/{len(recs)}, true {f.reference}", file=sys.stderr)
    if args.out:
        stream.close()


if __name__ == "__main__":
    main()
