"""Integrand contract and the benchmark integrand suite.

An integrand is any callable mapping an ``(n, d)`` array of points to an
``(n,)`` array of values.  It must be deterministic and safe to call from
several threads at once; state it needs (constants, tables) is set up at
construction time and only read afterwards.

Sums over coordinates are accumulated column by column so that the value
at a point does not depend on how many other points share the call.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from .errors import ConfigError, ReferenceValueError

PUBLISHED = "published"
ANALYTIC = "analytic"

FA_REFERENCE = -49.165073
FB_REFERENCE = 1.0
FB_VARIANCE = 0.01


@dataclass(frozen=True, eq=False)
class IntegrandSpec:
    name: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    dim: int
    lower: tuple
    upper: tuple
    reference: float | None = None
    provenance: str | None = None
    state: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.evaluate(x)

    @property
    def volume(self) -> float:
        return math.prod(h - l for l, h in zip(self.lower, self.upper))


def _weighted_sum(x, weights):
    s = x[:, 0] * weights[0]
    for j in range(1, x.shape[1]):
        s = s + x[:, j] * weights[j]
    return s


def _f1(x):
    return np.cos(_weighted_sum(x, np.arange(1, x.shape[1] + 1, dtype=np.float64)))


_F2_A2 = 1.0 / 50**2


def _f2(x):
    out = np.ones(x.shape[0])
    for j in range(x.shape[1]):
        t = x[:, j] - 0.5
        out = out / (_F2_A2 + t * t)
    return out


def _f3(x):
    d = x.shape[1]
    return (1.0 + _weighted_sum(x, np.arange(1, d + 1, dtype=np.float64))) ** (-d - 1.0)


def _f4(x):
    s = np.zeros(x.shape[0])
    for j in range(x.shape[1]):
        t = x[:, j] - 0.5
        s = s + t * t
    return np.exp(-625.0 * s)


def _f5(x):
    s = np.zeros(x.shape[0])
    for j in range(x.shape[1]):
        s = s + np.abs(x[:, j] - 0.5)
    return np.exp(-10.0 * s)


def _f6(x):
    d = x.shape[1]
    inside = np.ones(x.shape[0], dtype=bool)
    for j in range(d):
        inside &= x[:, j] < (4.0 + j) / 10.0
    s = _weighted_sum(x, np.arange(5, d + 5, dtype=np.float64))
    return np.where(inside, np.exp(np.where(inside, s, 0.0)), 0.0)


_SUITE = {1: _f1, 2: _f2, 3: _f3, 4: _f4, 5: _f5, 6: _f6}
SYMMETRIC_FAMILIES = frozenset({2, 4, 5})


def make_suite_integrand(family: int, d: int) -> IntegrandSpec:
    if family not in _SUITE:
        raise ConfigError(f"unknown integrand family {family!r}; expected 1..6")
    if d < 1:
        raise ConfigError(f"invalid dimension {d}")
    return IntegrandSpec(
        name=f"f{family}",
        evaluate=_SUITE[family],
        dim=d,
        lower=(0.0,) * d,
        upper=(1.0,) * d,
        reference=reference_value(family, d),
        provenance=ANALYTIC,
    )


def _fa(x):
    return np.sin(_weighted_sum(x, np.ones(x.shape[1])))


def _fb(x):
    s = np.zeros(x.shape[0])
    for j in range(x.shape[1]):
        s = s + x[:, j] * x[:, j]
    norm = (2.0 * math.pi * FB_VARIANCE) ** (-x.shape[1] / 2.0)
    return norm * np.exp(-s / (2.0 * FB_VARIANCE))


def make_fA() -> IntegrandSpec:
    return IntegrandSpec("fA", _fa, 6, (0.0,) * 6, (10.0,) * 6, FA_REFERENCE, PUBLISHED)


def make_fB() -> IntegrandSpec:
    return IntegrandSpec("fB", _fb, 9, (-1.0,) * 9, (1.0,) * 9, FB_REFERENCE, PUBLISHED)


def make_constant(value: float = 1.0, d: int = 1, lower=0.0, upper=1.0) -> IntegrandSpec:
    lo = (float(lower),) * d
    hi = (float(upper),) * d

    def const(x):
        return np.full(x.shape[0], value)

    vol = math.prod(h - l for l, h in zip(lo, hi))
    return IntegrandSpec("const", const, d, lo, hi, value * vol, ANALYTIC)


class SeparableTable:
    """Product of per-axis piecewise-linear tables.

    A small example of an integrand carrying read-only state.  ``knots`` and
    ``values`` are sequences with one 1-D array per axis; the exact integral
    of the interpolant is the product of per-axis trapezoid sums.
    """

    def __init__(self, knots, values):
        self.knots = [np.array(k, dtype=np.float64) for k in knots]
        self.values = [np.array(v, dtype=np.float64) for v in values]
        for k, v in zip(self.knots, self.values):
            if k.shape != v.shape or k.size < 2 or not np.all(np.diff(k) > 0):
                raise ConfigError("each table needs >= 2 strictly increasing knots")
            k.setflags(write=False)
            v.setflags(write=False)

    def __call__(self, x):
        out = np.ones(x.shape[0])
        for j, (k, v) in enumerate(zip(self.knots, self.values)):
            out = out * np.interp(x[:, j], k, v)
        return out

    def integral(self) -> float:
        return math.prod(
            float(np.sum((v[1:] + v[:-1]) * np.diff(k)) / 2.0) for k, v in zip(self.knots, self.values)
        )

    def spec(self, name: str = "table") -> IntegrandSpec:
        lo = tuple(float(k[0]) for k in self.knots)
        hi = tuple(float(k[-1]) for k in self.knots)
        return IntegrandSpec(name, self, len(self.knots), lo, hi, self.integral(), ANALYTIC,
                             state={"knots": self.knots, "values": self.values})


def _f1_reference(d):
    prod = 1.0 + 0.0j
    for k in range(1, d + 1):
        prod *= (cmath.exp(1j * k) - 1.0) / (1j * k)
    return prod.real


def _f3_reference(d):
    a = list(range(1, d + 1))
    total = 0.0
    for size in range(d + 1):
        for subset in combinations(a, size):
            total += (-1.0) ** size / (1.0 + sum(subset))
    return total / (math.factorial(d) * math.prod(a))


_ONE_D = {
    2: lambda i: 100.0 * math.atan(25.0),
    4: lambda i: math.sqrt(math.pi) / 25.0 * math.erf(12.5),
    5: lambda i: (1.0 - math.exp(-5.0)) / 5.0,
    6: lambda i: math.expm1((i + 4) * (3 + i) / 10.0) / (i + 4),
}


def reference_value(family, d: int | None = None) -> float:
    """Known integral of a suite member, ``"fA"`` or ``"fB"``."""
    if family in ("fA", "fB"):
        return FA_REFERENCE if family == "fA" else FB_REFERENCE
    if isinstance(family, str) and family.startswith("f") and family[1:].isdigit():
        family = int(family[1:])
    if family not in _SUITE or d is None or d < 1:
        raise ReferenceValueError(f"no reference value for family={family!r}, d={d!r}")
    if family == 1:
        return _f1_reference(d)
    if family == 3:
        return _f3_reference(d)
    per_axis = _ONE_D[family]
    return math.prod(per_axis(i) for i in range(1, d + 1))


def get_integrand(name: str, dim: int | None = None) -> IntegrandSpec:
    """Look up an integrand by CLI name: ``f1``..``f6``, ``fA``, ``fB`` or ``const``."""
    if name == "fA":
        return make_fA()
    if name == "fB":
        return make_fB()
    if name == "const":
        return make_constant(1.0, dim or 1)
    if len(name) == 2 and name[0] == "f" and name[1] in "123456":
        if dim is None:
            raise ConfigError(f"integrand {name} needs a dimension")
        return make_suite_integrand(int(name[1]), dim)
    raise ConfigError(f"unknown integrand {name!r}")
