"""Batched sampling kernel over the stratification sub-cubes.

The unit cube is cut into ``m = g**d`` equal sub-cubes and every sub-cube
receives ``p`` samples.  Contiguous runs of ``s`` sub-cubes form one batch;
batches are evaluated concurrently but reduced strictly in cube order, so
the result for a given ``(seed, iteration, m, p)`` does not depend on how
many workers ran or how the cubes were batched.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from . import rng
from .errors import ConfigError, IntegrandError
from .grid import Grid

BATCHES_PER_WORKER = 32
# variances below this multiple of eps * mean(v**2) are cancellation noise
VARIANCE_NOISE_FLOOR = 4 * np.finfo(np.float64).eps


@dataclass
class CubeAccumulator:
    """Running sums of the weighted sample values ``f(x) * J`` of one sub-cube."""

    sum_v: float = 0.0
    sum_v2: float = 0.0
    count: int = 0

    def add(self, v: float) -> None:
        self.sum_v += v
        self.sum_v2 += v * v
        self.count += 1


@dataclass
class SampleResult:
    estimate: float
    variance: float
    contributions: np.ndarray | None
    n_samples: int
    contribution_writes: int

    def __iter__(self):
        yield self.estimate
        yield self.variance
        yield self.contributions


def cube_variance(sum_v, sum_v2, p: int):
    """Variance of a sub-cube's sample mean from its running sums.

    Works elementwise on arrays.  Differences that are within rounding of
    zero are returned as exactly zero.
    """
    if p < 2:
        raise ConfigError(f"need at least 2 samples per cube, got {p}")
    mean = sum_v / p
    msq = sum_v2 / p
    diff = msq - mean * mean
    var = diff / (p - 1)
    noise = diff <= VARIANCE_NOISE_FLOOR * msq
    if np.ndim(var) == 0:
        return 0.0 if noise else float(var)
    return np.where(noise, 0.0, var)


def update_variance(acc: CubeAccumulator) -> float:
    return cube_variance(acc.sum_v, acc.sum_v2, acc.count)


def intervals_per_axis(m: int, d: int) -> int:
    """Integer ``g`` with ``g**d == m``."""
    g = max(1, round(m ** (1.0 / d)))
    for cand in (g - 1, g, g + 1):
        if cand >= 1 and cand**d == m:
            return cand
    raise ConfigError(f"cube count {m} is not a perfect {d}-th power")


def cube_digits(t, g: int, d: int):
    """Per-axis interval index of sub-cube ``t``; axis 0 varies fastest."""
    t = np.asarray(t)
    return np.stack([(t // g**j) % g for j in range(d)], axis=-1)


def cube_unit_point(t: int, g: int, d: int, r) -> np.ndarray:
    """Point of sub-cube ``t`` at relative offsets ``r`` (each in [0, 1))."""
    if not 0 <= t < g**d:
        raise ConfigError(f"cube index {t} out of range for {g}**{d} cubes")
    r = np.asarray(r, dtype=np.float64)
    return (cube_digits(t, g, d).astype(np.float64) + r) / g


def set_batch_size(m: int, workers: int) -> int:
    """Sub-cubes per batch: about 32 batches per worker, at least 1 cube."""
    if m < 1 or workers < 1:
        raise ConfigError("cube count and worker count must be positive")
    return max(1, -(-m // (workers * BATCHES_PER_WORKER)))


def default_workers() -> int:
    return os.cpu_count() or 1


def _validate(grid: Grid, m: int, s: int, p: int):
    if m < 1:
        raise ConfigError(f"cube count must be >= 1, got {m}")
    if s < 1:
        raise ConfigError(f"batch size must be >= 1, got {s}")
    if p < 2:
        raise ConfigError(f"need at least 2 samples per cube, got {p}")
    return intervals_per_axis(m, grid.dims)


@numba.njit(cache=True, error_model="numpy")
def _place_samples(key, lo, hi, p, g, left, right, widths, xt, jac, bins):
    """Generate and map the samples of cubes ``lo .. hi - 1``.

    Writes coordinates ``xt`` (d, n), Jacobians ``jac`` (n,) and bin indices
    ``bins`` (d, n) in cube-major, sample-minor order.
    """
    d, n_b = widths.shape
    digits = np.empty(d, dtype=np.int64)
    rem = lo
    for j in range(d):
        digits[j] = rem % g
        rem //= g
    i = 0
    for t in range(lo, hi):
        for k in range(p):
            base = np.uint64((t * p + k) * d)
            jv = 1.0
            for j in range(d):
                r = rng.uniform_at(key, base + np.uint64(j))
                u = (np.float64(digits[j]) + r) / g
                z = u * n_b
                b = int(z)
                if b > n_b - 1:
                    b = n_b - 1
                delta = z - b
                w = widths[j, b]
                xv = left[j, b] + delta * w
                xt[j, i] = min(xv, right[j, b])
                jv *= n_b * w
                bins[j, i] = b
            jac[i] = jv
            i += 1
        # odometer step to the next cube, axis 0 fastest
        for j in range(d):
            digits[j] += 1
            if digits[j] < g:
                break
            digits[j] = 0


def _sample_batch(f, grid, key, g, p, lo, hi, track_axes):
    d = grid.dims
    nc = hi - lo
    n = nc * p
    xt = np.empty((d, n))
    jac = np.empty(n)
    bins = np.empty((d, n), dtype=np.intp)
    _place_samples(np.uint64(key), lo, hi, p, g, grid._left_edges, grid.right_edges, grid._widths, xt, jac, bins)
    x = xt.T
    fx = np.asarray(f(x), dtype=np.float64).reshape(-1)
    if fx.shape != (n,):
        raise IntegrandError(f"integrand returned shape {fx.shape} for {n} points")
    bad = ~np.isfinite(fx)
    if bad.any():
        i = int(np.argmax(bad))
        raise IntegrandError(f"non-finite integrand value {fx[i]} at x={x[i].tolist()}", x[i])
    w = fx * jac
    wk = w.reshape(nc, p)
    s1 = np.zeros(nc)
    s2 = np.zeros(nc)
    for k in range(p):
        col = wk[:, k]
        s1 += col
        s2 += col * col
    var = cube_variance(s1, s2, p)
    if track_axes:
        return s1, var, w * w, bins[:track_axes]
    return s1, var, None, None


def _sequential_sum(acc: float, values: np.ndarray) -> float:
    # left fold in index order: acc + v0 + v1 + ...
    if values.size == 0:
        return acc
    return float(np.cumsum(np.concatenate([[acc], values]))[-1])


def _run(f, grid, m, s, p, seed, iteration, track_axes, workers):
    g = _validate(grid, m, s, p)
    key = rng.stream_key(seed, iteration)
    ranges = [(lo, min(lo + s, m)) for lo in range(0, m, s)]
    total = 0.0
    var_total = 0.0
    contrib = np.zeros((track_axes, grid.n_bins)) if track_axes else None

    def job(bounds):
        return _sample_batch(f, grid, key, g, p, bounds[0], bounds[1], track_axes)

    def consume(parts):
        nonlocal total, var_total
        s1, var, w2, bins = parts
        total = _sequential_sum(total, s1)
        var_total = _sequential_sum(var_total, var)
        if track_axes:
            for j in range(track_axes):
                # unbuffered, applied in sample order
                np.add.at(contrib[j], bins[j], w2)

    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(ranges) == 1:
        for bounds in ranges:
            consume(job(bounds))
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(ranges))) as pool:
            for parts in pool.map(job, ranges):
                consume(parts)

    n = m * p
    return SampleResult(
        estimate=total / n,
        variance=var_total / (m * m),
        contributions=contrib,
        n_samples=n,
        contribution_writes=n * track_axes,
    )


def v_sample(f, grid: Grid, m: int, s: int | None, p: int, seed: int, iteration: int = 0,
             *, workers: int | None = None, axes: int | None = None) -> SampleResult:
    """One sampling pass that also accumulates per-bin squared contributions.

    ``axes`` limits contribution tracking to the first ``axes`` axes (1 for
    the symmetric variant); by default all axes are tracked.
    """
    track = grid.dims if axes is None else axes
    if not 1 <= track <= grid.dims:
        raise ConfigError(f"axes must be in 1..{grid.dims}, got {axes}")
    if s is None:
        s = set_batch_size(m, workers or default_workers())
    return _run(f, grid, m, s, p, seed, iteration, track, workers)


def v_sample_no_adjust(f, grid: Grid, m: int, s: int | None, p: int, seed: int,
                       iteration: int = 0, *, workers: int | None = None) -> SampleResult:
    """Same as :func:`v_sample` without any bin bookkeeping."""
    if s is None:
        s = set_batch_size(m, workers or default_workers())
    return _run(f, grid, m, s, p, seed, iteration, 0, workers)


__all__ = [
    "CubeAccumulator",
    "SampleResult",
    "cube_digits",
    "cube_unit_point",
    "cube_variance",
    "intervals_per_axis",
    "set_batch_size",
    "update_variance",
    "v_sample",
    "v_sample_no_adjust",
]
