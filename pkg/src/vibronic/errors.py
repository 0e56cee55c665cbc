"""Exception types shared across the package.

The hierarchy keeps error classes coarse but distinguishable, so the CLI can
map them onto distinct exit codes: input/parse problems, numerical failures
(truncation that cannot be converged), and detection-model problems.
"""


class VibronicError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(VibronicError, ValueError):
    """Invalid mode count, cutoff, or an operation on an unsupported geometry."""


class ParameterError(VibronicError, ValueError):
    """A numeric argument is out of its allowed domain (non-finite, wrong sign, ...)."""


class RotationMatrixError(VibronicError, ValueError):
    """A mode-mixing matrix is not a proper rotation."""


class ReflectionError(RotationMatrixError):
    """The mode-mixing matrix is a reflection (determinant -1)."""


class ConfigurationError(VibronicError, ValueError):
    """Unknown option value, e.g. an unrecognised unit system or width kind."""


class ParamsFileError(VibronicError, ValueError):
    """A parameter or table file failed to parse or validate; names the field."""


class LeakageError(VibronicError, RuntimeError):
    """Truncation error could not be brought below tolerance within the cutoff cap."""


class ModelError(VibronicError, ValueError):
    """The detection model cannot be applied (e.g. zero transfer fidelity)."""


class OutOfModelWarning(UserWarning):
    """A corrected population fell outside the plausible range and was clamped."""
