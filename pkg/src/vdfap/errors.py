"""Exception types shared across the package.

The CLI maps :class:`ParameterError` to exit status 2 and
:class:`DomainError` to exit status 3.
"""


class VdfapError(Exception):
    """Base class for all package errors."""


class ParameterError(VdfapError, ValueError):
    """A parameter violates the invariants of the type that owns it."""


class DimensionError(ParameterError):
    """An operation was invoked for an unsupported dimension."""


class MismatchError(ParameterError):
    """Two parameter sets that must agree do not (e.g. drifts in a sum)."""


class ConfigurationError(ParameterError):
    """A simulation configuration cannot meet its accuracy contract."""


class DomainError(VdfapError, ValueError):
    """A numerical routine was called outside its mathematical domain."""


class DegenerateSampleError(DomainError):
    """A sample batch contains coincident points."""
