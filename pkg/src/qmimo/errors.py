"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A configuration value violates a structural requirement."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its guaranteed state.

    Raised with enough context (bracket endpoints, residuals, iteration
    counts) to diagnose the failure without re-running.
    """


class DegenerateChannelError(NumericalError):
    """The channel matrix carries no usable signal dimensions."""
