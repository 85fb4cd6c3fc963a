"""Exception hierarchy shared by the library and the CLI."""


class SpinSimError(Exception):
    """Base class for simulator errors; carries the CLI exit code."""

    exit_code = 1


class ConfigError(SpinSimError, ValueError):
    """Malformed or inconsistent experiment description."""

    exit_code = 2


class DatasetError(SpinSimError, ValueError):
    """A stored dataset is missing, malformed, or unsuitable for the analysis."""

    exit_code = 2


class DimensionError(SpinSimError, ValueError):
    """Hilbert space too large for dense propagation."""

    exit_code = 3


class NumericalError(SpinSimError):
    """Propagation or post-processing produced an unphysical result."""

    exit_code = 4
