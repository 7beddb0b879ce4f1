"""Exception types shared across the package."""


class TabuloError(Exception):
    """Base class for all tabulo errors."""


class DuplicateTableName(TabuloError):
    pass


class UnknownTable(TabuloError):
    pass


class UnsortedSplits(TabuloError):
    """Split rows must be strictly ascending byte strings."""


class EmptyTable(TabuloError):
    pass


class ZeroValueEntry(TabuloError):
    """Zero is the sparse absent state and is never stored."""


class OutputNotEmpty(TabuloError):
    pass


class UnsortedInput(TabuloError):
    """An input stream violated its key-sorted precondition."""


class Overflow(TabuloError):
    """A value left the unsigned 64-bit range; wrapping is never allowed."""


class MultiplyOverflow(Overflow):
    pass


class AddOverflow(Overflow):
    pass


class ZeroBaseline(TabuloError):
    pass


class RowBufferExceeded(TabuloError):
    """A single buffered row grew past the configured cap."""
