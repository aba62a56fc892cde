"""Exception types shared across the package.

The CLI maps these onto distinct exit codes: configuration/validation
problems exit with 1, numerical-guard aborts with 2.
"""


class WavecapError(Exception):
    """Base class for all package errors."""


class ConfigError(WavecapError):
    """Invalid configuration text or invariant violation.

    ``errors`` holds one "field.path: message" string per violation so a
    bad config reports everything wrong with it at once.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ValidationError(WavecapError, ValueError):
    """A domain object violates one of its invariants."""


class NumericsError(WavecapError, RuntimeError):
    """A run-time numerical guard tripped (accuracy bound, boundary
    wrap-around, incomplete transit)."""


class CalibrationError(WavecapError, RuntimeError):
    """Detector-strength calibration could not reach the target capture.

    ``best`` carries the best CalibrationResult found on the rising branch.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
