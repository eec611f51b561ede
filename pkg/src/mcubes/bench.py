"""Benchmark harness: single runs, tolerance sweeps and their summaries as CSV.

    mcubes-bench run --integrand f4 --dim 8 --tau-rel 1e-3
    mcubes-bench sweep --integrand f2 --dim 6 --runs 100 --out f26.csv
    mcubes-bench summarize f26.csv
"""

from __future__ import annotations

import argparse
import csv
import logging
import statistics
import sys
import time
from dataclasses import astuple, dataclass, fields

from .driver import RunConfig, integrate
from .errors import MCubesError
from .integrands import IntegrandSpec, get_integrand

log = logging.getLogger(__name__)

SCHEDULE_START = 1e-3
SCHEDULE_FACTOR = 5
SCHEDULE_FLOOR = 1e-9
ADVANCE_SUCCESS_RATE = 0.5


@dataclass
class ExperimentRecord:
    integrand: str
    d: int
    tau_rel: float
    run: int
    seed: int
    estimate: float
    error: float
    chi2_dof: float
    converged: bool
    true_value: float | None
    achieved_rel_error: float | None
    iterations: int
    total_samples: int
    wall_ms: float


HEADER = [f.name for f in fields(ExperimentRecord)]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def format_row(record: ExperimentRecord) -> list:
    return [_fmt(v) for v in astuple(record)]


def tolerance_schedule(start=SCHEDULE_START, factor=SCHEDULE_FACTOR, floor=SCHEDULE_FLOOR):
    """Tolerances ``start / factor**k`` not below ``floor``."""
    levels = []
    k = 0
    while start / factor**k >= floor:
        levels.append(start / factor**k)
        k += 1
    return levels


def run_once(f: IntegrandSpec, config: RunConfig, run: int = 0) -> ExperimentRecord:
    t0 = time.perf_counter()
    res = integrate(f, config)
    wall = (time.perf_counter() - t0) * 1e3
    true = f.reference
    achieved = None
    if true is not None:
        achieved = abs(res.estimate - true) / abs(true) if true != 0 else abs(res.estimate)
    return ExperimentRecord(
        integrand=f.name,
        d=f.dim,
        tau_rel=config.tau_rel,
        run=run,
        seed=config.seed,
        estimate=res.estimate,
        error=res.error,
        chi2_dof=res.chi2_dof,
        converged=res.converged,
        true_value=true,
        achieved_rel_error=achieved,
        iterations=res.iterations_used,
        total_samples=res.total_samples,
        wall_ms=wall,
    )


def run_sweep(f: IntegrandSpec, runs: int, schedule=None, *, maxcalls: int = 1_000_000,
              itmax: int = 20, ita=None, seed: int = 0, calls_growth: float = 1.0,
              writer=None, **config_kw) -> list:
    """Run ``runs`` seeded integrations per tolerance level.

    Moves to the next (tighter) level only while at least half the runs
    at the current level converged.  ``maxcalls`` is multiplied by
    ``calls_growth`` at every level.  Each record is handed to ``writer``
    as soon as it exists.
    """
    if schedule is None:
        schedule = tolerance_schedule()
    records = []
    calls = float(maxcalls)
    for tau in schedule:
        ok = 0
        for run in range(runs):
            cfg = RunConfig(d=f.dim, maxcalls=int(calls), itmax=itmax, ita=ita, tau_rel=tau,
                            seed=seed + run, **config_kw)
            rec = run_once(f, cfg, run)
            ok += rec.converged
            records.append(rec)
            if writer is not None:
                writer(rec)
        log.info("%s d=%d tau=%g: %d/%d converged", f.name, f.dim, tau, ok, runs)
        if ok < ADVANCE_SUCCESS_RATE * runs:
            break
        calls *= calls_growth
    return records


def _quartiles(values):
    if len(values) == 1:
        return values[0], values[0], values[0]
    q1, med, q3 = statistics.quantiles(values, n=4, method="inclusive")
    return q1, med, q3


SUMMARY_HEADER = ["integrand", "d", "tau_rel", "runs", "converged", "min", "q1", "median", "q3", "max"]


def summarize(rows) -> list:
    """Box-plot statistics of achieved relative error over converged runs."""
    groups = {}
    for row in rows:
        key = (row["integrand"], int(row["d"]), float(row["tau_rel"]))
        groups.setdefault(key, []).append(row)
    out = []
    for (name, d, tau), grp in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1], -kv[0][2])):
        errs = sorted(float(r["achieved_rel_error"]) for r in grp
                      if r["converged"] == "1" and r["achieved_rel_error"] != "")
        stats = [None] * 5
        if errs:
            q1, med, q3 = _quartiles(errs)
            stats = [errs[0], q1, med, q3, errs[-1]]
        out.append([name, d, tau, len(grp), sum(r["converged"] == "1" for r in grp), *stats])
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _add_run_flags(p):
    p.add_argument("--integrand", required=True, help="f1..f6, fA, fB or const")
    p.add_argument("--dim", type=int, help="dimension (suite integrands)")
    p.add_argument("--tau-rel", type=float, default=1e-3)
    p.add_argument("--maxcalls", type=float, default=1e6)
    p.add_argument("--itmax", type=int, default=20)
    p.add_argument("--ita", type=int, help="adjusting iterations (default: itmax)")
    p.add_argument("--n-bins", type=int, default=50)
    p.add_argument("--alpha", type=float, default=1.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", choices=["mcubes", "mcubes1d"], default="mcubes")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = _Parser(prog="mcubes-bench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_run_flags(sub.add_parser("run", help="one integration, one CSV row"))
    sweep = sub.add_parser("sweep", help="tolerance schedule with repeated runs")
    _add_run_flags(sweep)
    sweep.add_argument("--runs", type=int, default=100)
    sweep.add_argument("--calls-growth", type=float, default=1.0,
                       help="maxcalls multiplier per tolerance level")
    summ = sub.add_parser("summarize", help="box-plot statistics of a sweep CSV")
    summ.add_argument("csv", help="sweep output")
    summ.add_argument("--out")
    summ.add_argument("-v", "--verbose", action="store_true")
    return parser


def _config_kw(args):
    return dict(n_bins=args.n_bins, alpha=args.alpha, variant=args.variant, workers=args.workers)


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", newline=""), True


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "summarize":
            with open(args.csv, newline="") as fh:
                rows = list(csv.DictReader(fh))
            stream, close = _open_out(args.out)
            w = csv.writer(stream, lineterminator="\n")
            w.writerow(SUMMARY_HEADER)
            for row in summarize(rows):
                w.writerow([_fmt(v) for v in row])
            if close:
                stream.close()
            return 0

        f = get_integrand(args.integrand, args.dim)
        if args.dim is not None and args.dim != f.dim:
            raise MCubesError(f"{args.integrand} is {f.dim}-dimensional, got --dim {args.dim}")
        stream, close = _open_out(args.out)
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(HEADER)
        stream.flush()

        def emit(rec):
            w.writerow(format_row(rec))
            stream.flush()

        try:
            if args.command == "run":
                cfg = RunConfig(d=f.dim, maxcalls=int(args.maxcalls), itmax=args.itmax, ita=args.ita,
                                tau_rel=args.tau_rel, seed=args.seed, **_config_kw(args))
                rec = run_once(f, cfg)
                emit(rec)
                return 0 if rec.converged else 2
            run_sweep(f, args.runs, tolerance_schedule(start=args.tau_rel), maxcalls=int(args.maxcalls),
                      itmax=args.itmax, ita=args.ita, seed=args.seed, calls_growth=args.calls_growth,
                      writer=emit, **_config_kw(args))
            return 0
        finally:
            if close:
                stream.close()
    except (MCubesError, OSError) as exc:
        print(f"mcubes-bench: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
