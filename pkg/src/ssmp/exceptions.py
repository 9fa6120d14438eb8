"""Exception types raised across the package."""


class SsmpError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SsmpError, ValueError):
    """Non-finite entries, ragged files, or otherwise malformed input."""


class ShapeError(SsmpError, ValueError):
    """Operands have incompatible dimensions."""


class OverdeterminedSupportError(SsmpError, ValueError):
    """A support (or iteration budget) needs more columns than there are measurements."""


class NotComputableError(SsmpError):
    """An exhaustive computation exceeds its enumeration guard."""


class SelectionExhaustedError(SsmpError):
    """Fewer admissible candidates than indices requested.

    ``available`` is the number of candidates that could still be picked and
    ``partial`` (when set) is the RecoveryResult accumulated before the failure.
    """

    def __init__(self, available, requested, partial=None):
        super().__init__(
            f"only {available} admissible candidate(s) left, {requested} requested"
        )
        self.available = available
        self.requested = requested
        self.partial = partial
