"""Exception types shared across the package."""


class SquidFluxError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SquidFluxError, ValueError):
    """Invalid geometry, configuration, schema, or input data."""


class FitError(SquidFluxError, RuntimeError):
    """A fit did not converge or had no usable data."""


class NumericsError(SquidFluxError, RuntimeError):
    """A numerical routine produced an unusable result."""
