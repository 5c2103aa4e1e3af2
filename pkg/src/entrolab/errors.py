"""Shared exception types."""


class DataError(ValueError):
    """Field data is invalid for the requested operation (non-finite, wrong shape, ...)."""


class ConfigError(ValueError):
    """Experiment configuration failed validation; message carries the field path."""


class StabilityError(RuntimeError):
    """Time step violates the stability bound or the state degenerated."""


class FlowError(RuntimeError):
    """A solver step failed; carries the simulation time at which it happened."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (at t={t:.9g})")
        self.t = t


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""
