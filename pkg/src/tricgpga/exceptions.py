"""Exception hierarchy shared by the package and mapped to CLI exit codes."""


class TricgpgaError(Exception):
    """Base class for all package errors."""


class ConfigError(TricgpgaError, ValueError):
    """Invalid or unknown configuration value."""


class TensorFormatError(TricgpgaError, ValueError):
    """Malformed tensor file or invalid tensor contents."""


class EmptyDimensionError(TricgpgaError, ValueError):
    """A tricluster selects no coordinate along some axis."""


class InvariantError(TricgpgaError, RuntimeError):
    """An internal consistency check failed."""


class DeterminismError(InvariantError):
    """Results differ between runs that must be identical."""
