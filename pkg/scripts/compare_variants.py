"""Full-grid versus shared-axis adaptation on the symmetric integrands.

Reports, per integrand and variant, the median iterations, wall time,
achieved relative error and bin-update writes per adjusting iteration.

    python3 scripts/compare_variants.py --runs 10
"""

import argparse
import statistics
import time

from mcubes.driver import RunConfig, integrate
from mcubes.integrands import make_suite_integrand

CASES = [(2, 6, 2 * 10**5), (4, 8, 3 * 10**5), (5, 8, 10**5)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=10)
    ap.add_argument("--tau-rel", type=float, default=1e-3)
    ap.add_argument("--workers", type=int)
    args = ap.parse_args(argv)

    print("integrand,d,variant,converged,median_iterations,median_ms,median_rel_error,writes_per_iteration")
    for family, d, maxcalls in CASES:
        f = make_suite_integrand(family, d)
        for variant in ("mcubes", "mcubes1d"):
            iters, wall, errs, conv, writes = [], [], [], 0, 0
            for seed in range(args.runs):
                cfg = RunConfig(d=d, maxcalls=maxcalls, itmax=40, tau_rel=args.tau_rel, seed=seed,
                                variant=variant, workers=args.workers)
                t0 = time.perf_counter()
                res = integrate(f, cfg)
                wall.append((time.perf_counter() - t0) * 1e3)
                iters.append(res.iterations_used)
                errs.append(abs(res.estimate - f.reference) / abs(f.reference))
                conv += res.converged
                writes = res.history[0].contribution_writes
            print(f"f{family},{d},{variant},{conv}/{args.runs},{statistics.median(iters)},"
                  f"{statistics.median(wall):.1f},{statistics.median(errs):.3g},{writes}")


if __name__ == "__main__":
    main()
