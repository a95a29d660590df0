class BpfailError(Exception):
    """Base class for errors raised by bpfail."""


class ImageConditionError(BpfailError, ValueError):
    """The leading column block does not span the column space of V."""


class CompoundTooLargeError(BpfailError, ValueError):
    """A compound matrix would exceed the configured entry cap."""


class SingularBlockError(BpfailError, ValueError):
    """A leading square block needed for an exact solve is singular."""


class NumericFailure(BpfailError, RuntimeError):
    """A solver lost numerical control (pivot breakdown, duality gap, ...)."""
