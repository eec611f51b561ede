"""Counter-based uniforms keyed by (seed, iteration, sample, axis).

Every uniform is a pure function of its key: SplitMix64's output mix is
applied to ``key + (counter + 1) * GAMMA`` where ``key`` is derived from the
run seed and iteration, and ``counter = (cube * p + sample) * d + axis``.
Any worker can therefore regenerate exactly the numbers of its cube range
without coordinating with other workers.
"""

import numba
import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_SEED_SALT = 0xD1B54A32D192ED03
TWO_M53 = 2.0**-53


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, iteration: int) -> int:
    """64-bit key for one iteration of one run."""
    base = mix64((seed & MASK64) ^ _SEED_SALT)
    return mix64((base + ((iteration + 1) * GAMMA)) & MASK64)


def uniform_scalar(key: int, counter: int) -> float:
    """Single uniform in [0, 1), in plain integer arithmetic."""
    z = mix64((key + (counter + 1) * GAMMA) & MASK64)
    return (z >> 11) * TWO_M53


_U_GAMMA = np.uint64(GAMMA)
_U_M1 = np.uint64(_M1)
_U_M2 = np.uint64(_M2)


@numba.njit(cache=True, inline="always", error_model="numpy")
def uniform_at(key, counter):
    """Jitted twin of :func:`uniform_scalar`; ``key`` and ``counter`` are uint64."""
    z = key + (counter + np.uint64(1)) * _U_GAMMA
    z = (z ^ (z >> np.uint64(30))) * _U_M1
    z = (z ^ (z >> np.uint64(27))) * _U_M2
    z = z ^ (z >> np.uint64(31))
    return np.float64(z >> np.uint64(11)) * TWO_M53


@numba.njit(cache=True)
def _fill(key, start, out):
    for i in range(out.size):
        out[i] = uniform_at(key, start + np.uint64(i))


def uniforms(key: int, start: int, count: int) -> np.ndarray:
    """Uniforms for counters ``start .. start + count - 1``."""
    out = np.empty(count)
    _fill(np.uint64(key), np.uint64(start), out)
    return out
