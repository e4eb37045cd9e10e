"""Error taxonomy shared across the package.

ConfigError covers invalid model or run configuration (CLI exit code 2),
NumericalError covers runtime numerical failures such as reflection
non-convergence or a broken stability gate (CLI exit code 3).
"""


class LesionSimError(Exception):
    """Base class for package errors."""


class ConfigError(LesionSimError):
    """Invalid configuration or model parameters."""


class NumericalError(LesionSimError):
    """Numerical failure while simulating or integrating."""
