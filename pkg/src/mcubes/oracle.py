"""Serial reference for one sampling iteration.

Plain nested loops over sub-cubes and samples, in scalar Python
arithmetic.  It draws the same keyed uniforms as the batched sampler and
must agree with it bit for bit; it is slow and meant for testing only.
"""

import numpy as np

from . import rng
from .grid import Grid
from .sampler import CubeAccumulator, intervals_per_axis, update_variance


def vegas_serial_iteration(f, grid: Grid, m: int, p: int, seed: int, iteration: int = 0):
    """Return ``(estimate, variance, contributions)`` for one iteration."""
    d = grid.dims
    n_b = grid.n_bins
    g = intervals_per_axis(m, d)
    key = rng.stream_key(seed, iteration)
    lower = [float(v) for v in grid.lower]
    edges = [[float(v) for v in row] for row in grid.right_edges]
    contrib = [[0.0] * n_b for _ in range(d)]
    total = 0.0
    var_total = 0.0
    for t in range(m):
        digits = []
        rem = t
        for _ in range(d):
            digits.append(rem % g)
            rem //= g
        acc = CubeAccumulator()
        for k in range(p):
            x = [0.0] * d
            bins = [0] * d
            jac = 1.0
            for j in range(d):
                r = rng.uniform_scalar(key, (t * p + k) * d + j)
                u = (float(digits[j]) + r) / g
                z = u * n_b
                b = min(int(z), n_b - 1)
                left = edges[j][b - 1] if b > 0 else lower[j]
                width = edges[j][b] - left
                x[j] = min(left + (z - b) * width, edges[j][b])
                jac *= n_b * width
                bins[j] = b
            value = float(f(np.array([x]))[0]) * jac
            acc.add(value)
            for j in range(d):
                contrib[j][bins[j]] += value * value
        total += acc.sum_v
        var_total += update_variance(acc)
    return total / (m * p), var_total / (m * m), np.array(contrib)
