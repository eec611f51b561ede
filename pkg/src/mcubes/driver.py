"""Iteration driver: setup, adaptive and frozen-grid phases, result combination."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError
from .grid import DEFAULT_ALPHA, DEFAULT_N_BINS, Grid, init_uniform
from .sampler import default_workers, set_batch_size, v_sample, v_sample_no_adjust

VARIANTS = ("mcubes", "mcubes1d")
DEFAULT_CHI2_DOF_MAX = 1.5
# below this |I| the relative-error test becomes an absolute one
TINY_ESTIMATE = 1e-300


@dataclass
class RunConfig:
    d: int
    maxcalls: int
    itmax: int = 10
    ita: Optional[int] = None
    tau_rel: float = 1e-3
    seed: int = 0
    variant: str = "mcubes"
    n_bins: int = DEFAULT_N_BINS
    alpha: float = DEFAULT_ALPHA
    chi2_dof_max: float = DEFAULT_CHI2_DOF_MAX
    lower: Optional[tuple] = None
    upper: Optional[tuple] = None
    workers: Optional[int] = None

    def __post_init__(self):
        if self.ita is None:
            self.ita = self.itmax
        if self.d < 1:
            raise ConfigError(f"invalid dimension {self.d}")
        if self.maxcalls < 2 * 2**self.d:
            raise ConfigError(f"maxcalls={self.maxcalls} too small for d={self.d}; need >= {2 * 2**self.d}")
        if not 0 < self.tau_rel < 1:
            raise ConfigError(f"tau_rel must lie in (0, 1), got {self.tau_rel}")
        if self.itmax < 1:
            raise ConfigError(f"itmax must be >= 1, got {self.itmax}")
        if not 0 <= self.ita <= self.itmax:
            raise ConfigError(f"need 0 <= ita <= itmax, got ita={self.ita}, itmax={self.itmax}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.n_bins < 2:
            raise ConfigError(f"invalid bin count {self.n_bins}")
        if not self.alpha >= 0:
            raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class SetupParams:
    g: int
    m: int
    p: int
    s: int
    workers: int

    @property
    def calls(self) -> int:
        return self.m * self.p


@dataclass(frozen=True)
class IterationResult:
    estimate: float
    variance: float
    iteration: int
    contribution_writes: int = 0


@dataclass
class IntegrationResult:
    estimate: float
    error: float
    chi2_dof: float
    iterations_used: int
    converged: bool
    total_samples: int
    history: list = field(default_factory=list)
    grid: Optional[Grid] = None
    first_used: int = 0

    @property
    def rel_error(self) -> float:
        return self.error / abs(self.estimate) if self.estimate else math.inf


def _intervals(maxcalls: int, d: int) -> int:
    half = maxcalls // 2
    g = max(1, int(half ** (1.0 / d)))
    while g > 1 and g**d > half:
        g -= 1
    while (g + 1) ** d <= half:
        g += 1
    return g


def setup(config: RunConfig) -> SetupParams:
    g = _intervals(config.maxcalls, config.d)
    m = g**config.d
    p = max(2, config.maxcalls // m)
    if g < 1 or m * p > config.maxcalls:
        raise ConfigError(f"maxcalls={config.maxcalls} too small for d={config.d}")
    workers = config.workers or default_workers()
    return SetupParams(g=g, m=m, p=p, s=set_batch_size(m, workers), workers=workers)


def weighted_estimate(history):
    """Inverse-variance combination of iteration results.

    Returns ``(estimate, error, chi2_dof)``.  An iteration with zero
    variance is exact, so its estimate is returned with zero error.
    """
    if not history:
        raise ConfigError("cannot combine an empty history")
    for it in history:
        if it.variance <= 0:
            return it.estimate, 0.0, 0.0
    w = np.array([1.0 / it.variance for it in history])
    vals = np.array([it.estimate for it in history])
    wsum = w.sum()
    est = float((w * vals).sum() / wsum)
    err = float(wsum**-0.5)
    n = len(history)
    chi2 = float((w * (vals - est) ** 2).sum() / max(1, n - 1)) if n > 1 else 0.0
    return est, err, chi2


def combine_history(history, chi2_dof_max: float = DEFAULT_CHI2_DOF_MAX):
    """Combine the longest suffix of ``history`` whose chi2/dof is acceptable.

    Iterations run on a poorly adapted grid can report estimates that are
    far off with deceptively small variances.  They are dropped from the
    front until the remaining iterations agree.  Returns
    ``(estimate, error, chi2_dof, first_used)``.
    """
    for start in range(len(history)):
        est, err, chi2 = weighted_estimate(history[start:])
        if chi2 <= chi2_dof_max:
            return est, err, chi2, start
    raise AssertionError("a single iteration always has chi2_dof == 0")


def check_convergence(estimate: float, error: float, chi2_dof: float, config: RunConfig) -> bool:
    if chi2_dof > config.chi2_dof_max:
        return False
    if abs(estimate) < TINY_ESTIMATE:
        return error <= config.tau_rel
    return error / abs(estimate) <= config.tau_rel


def _bounds(f, config: RunConfig):
    dim = getattr(f, "dim", config.d)
    if dim != config.d:
        raise ConfigError(f"integrand has dimension {dim}, config says {config.d}")
    lower, upper = config.lower, config.upper
    f_lower = getattr(f, "lower", None)
    f_upper = getattr(f, "upper", None)
    if lower is None:
        lower = f_lower
    if upper is None:
        upper = f_upper
    if lower is None or upper is None:
        raise ConfigError("integration bounds missing from both config and integrand")
    if f_lower is not None and (
        not np.array_equal(np.broadcast_to(lower, (config.d,)), np.broadcast_to(f_lower, (config.d,)))
        or not np.array_equal(np.broadcast_to(upper, (config.d,)), np.broadcast_to(f_upper, (config.d,)))
    ):
        raise ConfigError("config bounds do not match the integrand's bounds")
    return lower, upper


def integrate(f, config: RunConfig, on_iteration: Callable | None = None) -> IntegrationResult:
    """Run the adaptive phase then the frozen-grid phase until converged.

    ``on_iteration(iteration, grid, sample_result)`` is called after every
    iteration with the grid that the next iteration will use.
    """
    lower, upper = _bounds(f, config)
    params = setup(config)
    grid = init_uniform(config.d, config.n_bins, lower, upper)
    symmetric = config.variant == "mcubes1d"
    history = []
    est = err = chi2 = 0.0
    first_used = 0
    converged = False
    for it in range(config.itmax):
        if it < config.ita:
            res = v_sample(f, grid, params.m, params.s, params.p, config.seed, it,
                           workers=params.workers, axes=1 if symmetric else None)
            if symmetric:
                grid = grid.adjust_symmetric(res.contributions[0], config.alpha)
            else:
                grid = grid.adjust(res.contributions, config.alpha)
        else:
            res = v_sample_no_adjust(f, grid, params.m, params.s, params.p, config.seed, it,
                                     workers=params.workers)
        history.append(IterationResult(res.estimate, res.variance, it, res.contribution_writes))
        est, err, chi2, first_used = combine_history(history, config.chi2_dof_max)
        if on_iteration is not None:
            on_iteration(it, grid, res)
        if check_convergence(est, err, chi2, config):
            converged = True
            break
    return IntegrationResult(
        estimate=est,
        error=err,
        chi2_dof=chi2,
        iterations_used=len(history),
        converged=converged,
        total_samples=len(history) * params.calls,
        history=history,
        grid=grid,
        first_used=first_used,
    )
