"""Acceptance gates.

Each test prints one ``PASS``/``FAIL`` (or ``SKIP``) line for its criterion straight to
the terminal (run with ``pytest -v tests/test_acceptance.py``) and then
asserts the same condition.  Per-iteration budgets are pinned here because
no published values exist for them.
"""

import math
import statistics
import time

import numpy as np
import pytest

from mcubes import (
    IterationResult,
    RunConfig,
    init_uniform,
    integrate,
    make_fA,
    make_fB,
    make_suite_integrand,
    v_sample,
    vegas_serial_iteration,
    weighted_estimate,
)

pytestmark = pytest.mark.slow

# (family, d, tau) -> (maxcalls, itmax); calibrated on one CPU core
ACCURACY_CONFIGS = {
    (2, 6, 1e-3): (10**5, 20),
    (2, 6, 2e-4): (2 * 10**5, 20),
    (3, 3, 1e-3): (10**5, 20),
    (3, 3, 2e-4): (10**5, 20),
    (4, 8, 1e-3): (3 * 10**5, 20),
    (4, 8, 2e-4): (10**6, 60),
    (5, 8, 1e-3): (10**5, 20),
    (5, 8, 2e-4): (2 * 10**5, 20),
}
RUNS = 20


def report(capsys, criterion, ok, detail):
    status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
    with capsys.disabled():
        print(f"\n{status} criterion {criterion}: {detail}")


def accuracy_gates(f, tau, results):
    """Median achieved error <= tau and >= 90% within 3 tau, over converged runs."""
    errs = [abs(r.estimate - f.reference) / abs(f.reference) for r in results if r.converged]
    if not errs:
        return False, "no run converged"
    med = statistics.median(errs)
    within = sum(e <= 3 * tau for e in errs) / len(errs)
    ok = med <= tau and within >= 0.9 and len(errs) >= len(results) // 2
    return ok, f"converged {len(errs)}/{len(results)}, median {med:.3g}, within 3tau {within:.0%}"


# -- 1 ---------------------------------------------------------------------


def _random_grid(rng, d, n_b):
    grid = init_uniform(d, n_b, [0.0] * d, [1.0] * d)
    for _ in range(rng.integers(0, 3)):
        grid = grid.adjust(rng.random((d, n_b)) ** rng.uniform(1, 6))
    return grid


def test_criterion_1_oracle_equivalence(capsys):
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    failures = []
    n_cases = 50
    for case in range(n_cases):
        d = int(rng.integers(1, 7))
        family = int(rng.integers(1, 7))
        p = int(rng.integers(2, 9))
        budget = math.exp(rng.uniform(math.log(2 * p), math.log(10**5)))
        g = max(1, int((budget / p) ** (1 / d)))
        while g**d * p > 10**5:
            g -= 1
        m = g**d
        grid = _random_grid(rng, d, int(rng.integers(2, 51)))
        seed = int(rng.integers(0, 2**63))
        iteration = int(rng.integers(0, 10))
        f = make_suite_integrand(family, d)
        want = vegas_serial_iteration(f, grid, m, p, seed, iteration)
        for workers, s in [(1, None), (3, int(rng.integers(1, m + 1))), (8, None)]:
            got = v_sample(f, grid, m, s, p, seed, iteration, workers=workers)
            if not (got.estimate == want[0] and got.variance == want[1]
                    and np.array_equal(got.contributions, want[2])):
                failures.append((case, family, d, m, p, workers, s))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60
    report(capsys, 1, ok, f"{n_cases} configs x 3 worker layouts, {len(failures)} mismatches, {elapsed:.1f}s")
    assert not failures
    assert elapsed < 60


# -- 2, 3 ------------------------------------------------------------------


def test_criterion_2_fA(capsys):
    f = make_fA()
    t0 = time.perf_counter()
    res = [integrate(f, RunConfig(d=6, maxcalls=2 * 10**6, itmax=10, tau_rel=1e-3, seed=s, workers=1))
           for s in range(RUNS)]
    elapsed = time.perf_counter() - t0
    covered = sum(abs(r.estimate - f.reference) <= 3 * r.error for r in res)
    med_sigma = statistics.median(r.error for r in res)
    ok = covered >= 18 and med_sigma <= 2.0 and elapsed < 300
    report(capsys, 2, ok, f"within 3 sigma {covered}/{RUNS}, median sigma {med_sigma:.4g} (gate 2.0), {elapsed:.0f}s")
    assert covered >= 18
    assert med_sigma <= 2.0
    assert elapsed < 300


def test_criterion_3_fB(capsys):
    f = make_fB()
    t0 = time.perf_counter()
    res = [integrate(f, RunConfig(d=9, maxcalls=2 * 10**6, itmax=15, tau_rel=1e-3, seed=s, workers=1))
           for s in range(RUNS)]
    elapsed = time.perf_counter() - t0
    good = sum(abs(r.estimate - 1.0) <= 3 * r.error and r.error <= 1e-2 for r in res)
    ok = good >= 18 and elapsed < 300
    report(capsys, 3, ok, f"within 3 sigma with sigma <= 1e-2: {good}/{RUNS}, "
                          f"median sigma {statistics.median(r.error for r in res):.3g}, {elapsed:.0f}s")
    assert good >= 18
    assert elapsed < 300


# -- 4 ---------------------------------------------------------------------


def test_criterion_4_accuracy(capsys):
    t0 = time.perf_counter()
    lines = []
    all_ok = True
    for (family, d, tau), (maxcalls, itmax) in ACCURACY_CONFIGS.items():
        f = make_suite_integrand(family, d)
        res = [integrate(f, RunConfig(d=d, maxcalls=maxcalls, itmax=itmax, tau_rel=tau, seed=s, workers=1))
               for s in range(RUNS)]
        ok, detail = accuracy_gates(f, tau, res)
        all_ok &= ok
        lines.append(f"f{family},{d} tau={tau:g}: {'ok' if ok else 'FAILED'} ({detail})")
    elapsed = time.perf_counter() - t0
    report(capsys, 4, all_ok and elapsed < 900, f"{elapsed:.0f}s\n    " + "\n    ".join(lines))
    assert all_ok, lines
    assert elapsed < 900


# -- 5 ---------------------------------------------------------------------


def test_criterion_5_f1_does_not_converge(capsys):
    outcomes = []
    for d in (6, 8):
        f = make_suite_integrand(1, d)
        for seed in range(2):
            r = integrate(f, RunConfig(d=d, maxcalls=10**6, itmax=100, tau_rel=2e-4, seed=seed, workers=1))
            outcomes.append((d, seed, r.converged, r.rel_error))
    ok = not any(c for _, _, c, _ in outcomes)
    detail = ", ".join(f"d={d} seed={s}: rel err {e:.2g}" for d, s, _, e in outcomes)
    report(capsys, 5, ok, f"no convergence at tau=2e-4 within 100 iterations ({detail})")
    assert ok


# -- 6 ---------------------------------------------------------------------


def test_criterion_6_symmetric_variant(capsys):
    problems = []
    lines = []

    def check_axes(it, grid, res):
        if res.contributions is None:
            return
        u = grid.unit_edges()
        if not all(np.array_equal(u[0], u[j]) for j in range(1, grid.dims)):
            problems.append(f"axes differ after iteration {it}")

    for (family, d, tau), (maxcalls, itmax) in ACCURACY_CONFIGS.items():
        if family not in (4, 5):
            continue
        f = make_suite_integrand(family, d)
        res = []
        for s in range(RUNS):
            cfg = RunConfig(d=d, maxcalls=maxcalls, itmax=itmax, tau_rel=tau, seed=s, workers=1,
                            variant="mcubes1d")
            res.append(integrate(f, cfg, on_iteration=check_axes))
        ok, detail = accuracy_gates(f, tau, res)
        if not ok:
            problems.append(f"f{family},{d} tau={tau:g} accuracy: {detail}")
        lines.append(f"f{family},{d} tau={tau:g}: {detail}")

        full = integrate(f, RunConfig(d=d, maxcalls=maxcalls, itmax=3, tau_rel=1e-9, seed=0, workers=1))
        sym = integrate(f, RunConfig(d=d, maxcalls=maxcalls, itmax=3, tau_rel=1e-9, seed=0, workers=1,
                                     variant="mcubes1d"))
        for a, b in zip(full.history, sym.history):
            if a.contribution_writes != d * b.contribution_writes:
                problems.append(f"writes {b.contribution_writes} vs {a.contribution_writes} at iteration {a.iteration}")
        lines.append(f"f{family},{d} writes per iteration: {sym.history[0].contribution_writes} "
                     f"vs {full.history[0].contribution_writes}")
    ok = not problems
    report(capsys, 6, ok, ("; ".join(problems) or "axes identical, gates met, writes 1/d") + "\n    "
           + "\n    ".join(lines))
    assert not problems


# -- 7 ---------------------------------------------------------------------


def test_criterion_7_weighted_examples(capsys):
    def it(e, s):
        return IterationResult(e, s * s, 0)

    def close(a, b):
        return abs(a - b) <= 1e-12 * abs(b)

    checks = []
    est, err, chi2 = weighted_estimate([it(1.0, 0.1)])
    checks.append(close(est, 1.0) and close(err, 0.1) and chi2 == 0)
    est, err, chi2 = weighted_estimate([it(1.0, 0.1), it(1.2, 0.2)])
    checks.append(close(est, 1.04) and close(err, 1 / math.sqrt(125)) and close(chi2, 0.8))
    est, err, chi2 = weighted_estimate([it(1.0, 0.1)] * 3)
    checks.append(close(est, 1.0) and close(err, 0.1 / math.sqrt(3)) and chi2 == 0)
    ok = all(checks)
    report(capsys, 7, ok, f"worked examples {sum(checks)}/3")
    assert ok


# -- 8 ---------------------------------------------------------------------


def _grid_case(rng):
    d = int(rng.integers(1, 5))
    n_b = int(rng.integers(2, 51))
    lower = rng.uniform(-10, 10, d)
    upper = lower + rng.uniform(1e-3, 20, d)
    grid = init_uniform(d, n_b, lower, upper)
    fixed = grid.adjust(np.full((d, n_b), rng.uniform(1e-3, 1e3)))
    errors = []
    if not np.allclose(fixed.right_edges, grid.right_edges, rtol=1e-12, atol=1e-12 * (upper - lower).max()):
        errors.append("uniform fixed point")
    c = rng.random((d, n_b)) ** rng.uniform(0.5, 10)
    c[rng.random((d, n_b)) < 0.2] = 0.0
    new = grid.adjust(c, float(rng.uniform(0, 3)))
    ext = np.concatenate([new.lower[:, None], new.right_edges], axis=1)
    if not np.all(np.diff(ext, axis=1) > 0):
        errors.append("monotonicity")
    # each bin has sampling probability 1/n_b, so the Jacobian integrates to the volume
    if not np.allclose(new.widths.sum(axis=1), upper - lower, rtol=1e-12):
        errors.append("measure")
    if not np.allclose((new.n_bins * new.widths).mean(axis=1), upper - lower, rtol=1e-12):
        errors.append("jacobian mean")
    u = rng.random((8, d))
    u[0] = 0.0
    u[1] = 1.0
    x, _, bins = new.map_points(u)
    lo = np.take_along_axis(ext, bins.T, axis=1).T
    hi = np.take_along_axis(ext, bins.T + 1, axis=1).T
    if not (np.all(lo <= x) and np.all(x <= hi) and np.array_equal(bins, new.bin_indices(u))):
        errors.append("transform/bin consistency")
    return errors


def test_criterion_8_grid_properties(capsys):
    rng = np.random.default_rng(8)
    n = 10**4
    failed = [e for e in (_grid_case(rng) for _ in range(n)) if e]
    ok = not failed
    report(capsys, 8, ok, f"{n} randomized grid cases, {len(failed)} failures")
    assert ok, failed[:5]


# -- 9 ---------------------------------------------------------------------


def test_criterion_9_wall_clock_not_reproduced(capsys):
    report(capsys, 9, "SKIP", "GPU wall-clock comparisons are out of scope at desk scale")
    pytest.skip("hardware-specific timings are not reproducible here")

