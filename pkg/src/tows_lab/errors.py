"""Exception hierarchy shared by all modules."""


class TowsError(Exception):
    """Base class for all library errors."""


class ElementNotFound(TowsError):
    """An element is not in the universe of the structure."""


class SignatureMismatch(TowsError):
    """Two structures were expected to share a signature."""


class FormatError(TowsError):
    """A file or stream does not conform to the grammar."""


class NotACover(TowsError):
    """The given pair is not a cover of the tree-order."""


class InvalidMarking(TowsError):
    """A mark set violates the preconditions of an operation."""


class DecodeFailure(TowsError):
    """The marks on an incidence graph are inconsistent."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending


class InvalidBasisChange(TowsError):
    """A change-of-basis matrix is singular or badly shaped."""


class PatternNotMatched(TowsError):
    """A pair does not exhibit any of the displayed patterns."""


class InvalidCore(TowsError):
    """A core file violates its type-specific constraint list."""


class SizeBoundExceeded(TowsError):
    """An exhaustive operation was asked to run beyond its bound."""
