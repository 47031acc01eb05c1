"""Exception hierarchy shared by every module.

Each class maps to one CLI exit code; see cli.EXIT_CODES.
"""


class HD0LError(Exception):
    """Base class for all package errors."""


class SystemValidationError(HD0LError):
    """Input system is malformed (bad alphabets, images, or seed)."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class LetterDomainError(HD0LError):
    """A word or image uses a letter outside the declared alphabet."""


class PreconditionError(HD0LError):
    """An operation was called on inputs that violate its stated contract."""


class BoundedImageError(HD0LError):
    """The image sequence is finite or bounded, so no infinite limit word exists."""


class ResourceLimitError(HD0LError):
    """A configured search or expansion cap was hit before reaching a verdict."""


class InternalCheckError(HD0LError):
    """A self-verification assertion failed; indicates a bug, not bad input."""
