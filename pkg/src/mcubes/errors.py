"""Exception types raised by the integrator."""


class MCubesError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(MCubesError, ValueError):
    """Invalid run configuration or grid/sampler arguments."""


class IntegrandError(MCubesError, ArithmeticError):
    """The integrand returned a non-finite value.

    ``point`` holds the integration-space coordinates of the first
    offending sample.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class ReferenceValueError(MCubesError, KeyError):
    """No reference integral is known for the requested integrand."""
