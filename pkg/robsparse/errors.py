"""Exceptions raised across robsparse."""


class RobsparseError(RuntimeError):
    """Base class; sweeps catch this per run and keep going."""


class InputError(RobsparseError, ValueError):
    """Bad input shapes or violated preconditions."""


class ConfigurationError(RobsparseError, ValueError):
    """Invalid run configuration or missing data a method needs."""


class ModelConfigurationError(RobsparseError):
    """Model parameters that violate the model's assumptions."""


class DegenerateModelError(RobsparseError):
    """The functional map is undefined, e.g. a zero GLM divisor."""


class NumericalError(RobsparseError):
    """A numerical routine failed; `diagnostics` holds what was known."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class EllipsoidStateError(NumericalError):
    """The ellipsoid shape matrix lost positive definiteness."""


class EstimationError(RobsparseError):
    """The estimator could not produce an output for this input."""
