"""Exception hierarchy shared by every module of the package."""


class SemiallocError(Exception):
    """Base class for all errors raised by semialloc."""


class NonPositive(SemiallocError, ValueError):
    """A strictly-smaller grid value was requested for zero."""


class PrecisionExceeded(SemiallocError, ArithmeticError):
    """A dyadic exponent would exceed the configured bound."""


class DepthExceeded(SemiallocError, ValueError):
    pass


class WeightOverflow(SemiallocError, ValueError):
    pass


class NotDyadic(SemiallocError, ValueError):
    pass


class ZeroMass(SemiallocError, ValueError):
    pass


class InvalidInput(SemiallocError, ValueError):
    pass


class ScheduleNotMonotone(SemiallocError, ValueError):
    pass


class NotMonotoneStages(SemiallocError, ValueError):
    pass


class InternalInvariantBroken(SemiallocError, RuntimeError):
    """Allocation ran out of free space; only possible for broken input."""


class NotCovered(SemiallocError, ValueError):
    """The target string has an empty preimage."""

    def __init__(self, target):
        self.target = target
        super().__init__(f"target {target or '-'!s} has empty preimage")


class StreamFinalized(SemiallocError, RuntimeError):
    pass


class BoundViolated(SemiallocError, ValueError):
    """Average test mass over a preimage exceeds the caller's bound."""

    def __init__(self, prefix, message):
        self.prefix = prefix
        super().__init__(message)


class FormatError(SemiallocError, ValueError):
    """Malformed text table, allocation dump or bitstream."""
