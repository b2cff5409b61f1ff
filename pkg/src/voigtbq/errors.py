"""Exception hierarchy shared by the solver, the labs and the CLI."""


class VoigtError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(VoigtError, ValueError):
    """Invalid configuration. ``key`` names the offending entry when known."""

    def __init__(self, message, key=None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class ConstraintViolation(VoigtError, ValueError):
    """A structural precondition on a field does not hold (e.g. nonzero mean vorticity)."""


class NonFiniteError(VoigtError, FloatingPointError):
    """A non-finite coefficient appeared during time integration."""

    def __init__(self, message, t=None, last_good_t=None):
        self.t = t
        self.last_good_t = last_good_t
        super().__init__(message)


class MaxStepsExceeded(VoigtError, RuntimeError):
    """The step budget ran out before reaching ``t_end``."""


class CheckpointFormatError(VoigtError, ValueError):
    """A checkpoint file is corrupt, truncated or incompatible."""
