"""Exception hierarchy.

Each family maps onto one CLI exit code (see ``fluxonium.cli``).
"""


class FluxoniumError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 2


class ConfigError(FluxoniumError):
    """Malformed or missing configuration input."""

    exit_code = 1


class ParameterDomainError(FluxoniumError, ValueError):
    """A physical parameter lies outside its allowed domain."""


class NumericError(FluxoniumError, RuntimeError):
    """An eigensolver or integrator failed to converge."""


class LabelingError(FluxoniumError):
    """Dressed-state labeling is ambiguous (usually near an avoided crossing)."""

    def __init__(self, message, collisions=()):
        super().__init__(message)
        self.collisions = list(collisions)


class CalibrationError(FluxoniumError):
    """A calibration could not be carried out (no bracket, inconsistent inputs)."""


class UnsupportedConfigurationError(FluxoniumError):
    """A configuration the model has no data for (e.g. echo with n_pi != 3)."""


class FitError(FluxoniumError, RuntimeError):
    """Decay-curve fit did not converge; raw data is attached."""

    exit_code = 3

    def __init__(self, message, data=None):
        super().__init__(message)
        self.data = data
