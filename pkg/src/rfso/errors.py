"""Exception and warning types shared across the package."""


class RfsoError(Exception):
    """Base class for all package errors."""


class GammaPoleError(RfsoError, ValueError):
    """Gamma function evaluated at a non-positive integer."""


class ConvergenceError(RfsoError, ArithmeticError):
    """An iterative evaluation did not reach its tolerance."""


class MeijerGDomainError(RfsoError, ValueError):
    """Meijer-G parameters outside the supported class."""


class ConsistencyError(RfsoError, ArithmeticError):
    """A probability left its admissible range by more than numerical noise."""


class ModelError(RfsoError, ValueError):
    """Invalid physical or model parameters."""


class ConfigError(RfsoError, ValueError):
    """Experiment configuration failed validation."""


class CoincidentPoleWarning(RuntimeWarning):
    """Two Meijer-G lower parameters differ by (almost) an integer."""


class IdealHardwareWarning(RuntimeWarning):
    """The amplifier is distortion-free, so no capacity ceiling exists."""
