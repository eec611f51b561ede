"""Parallel VEGAS integration with stratified sub-cube batches."""

from .driver import (
    IntegrationResult,
    IterationResult,
    RunConfig,
    SetupParams,
    check_convergence,
    combine_history,
    integrate,
    setup,
    weighted_estimate,
)
from .errors import ConfigError, IntegrandError, MCubesError, ReferenceValueError
from .grid import Grid, init_uniform
from .integrands import (
    IntegrandSpec,
    get_integrand,
    make_fA,
    make_fB,
    make_suite_integrand,
    reference_value,
)
from .oracle import vegas_serial_iteration
from .sampler import set_batch_size, v_sample, v_sample_no_adjust

__all__ = [
    "ConfigError",
    "Grid",
    "IntegrandError",
    "IntegrandSpec",
    "IntegrationResult",
    "IterationResult",
    "MCubesError",
    "ReferenceValueError",
    "RunConfig",
    "SetupParams",
    "check_convergence",
    "combine_history",
    "get_integrand",
    "init_uniform",
    "integrate",
    "make_fA",
    "make_fB",
    "make_suite_integrand",
    "reference_value",
    "set_batch_size",
    "setup",
    "v_sample",
    "v_sample_no_adjust",
    "vegas_serial_iteration",
    "weighted_estimate",
]
