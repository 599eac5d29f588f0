"""Exception types shared across the package."""


class GuficError(Exception):
    """Base class for all package errors."""


class NotSkew(GuficError, ValueError):
    """Matrix handed to a vee map is not skew-symmetric."""


class NearSingular(GuficError):
    """Body Jacobian lost rank; the operational-space model is undefined."""

    def __init__(self, sigma_min, step=None):
        self.sigma_min = sigma_min
        self.step = step
        where = "" if step is None else f" at step {step}"
        super().__init__(f"body Jacobian near singular{where}: sigma_min={sigma_min:.3e}")


class NoConvergence(GuficError):
    """Inverse kinematics failed to reach the target."""


class ConfigError(GuficError):
    """Scenario or robot description failed validation."""


class MissingChannel(GuficError):
    """A simulation log lacks a column required by the passivity audit."""


class LogFormatError(GuficError):
    """A log file is unreadable or carries an unknown schema version."""
