"""Exception hierarchy shared by every module of the engine."""

from __future__ import annotations


class EGFError(Exception):
    """Base class for all engine errors."""


class InvariantViolation(EGFError):
    """A structural invariant of an input object does not hold."""


class AmbientMismatch(EGFError):
    pass


class NotContained(EGFError):
    pass


class NotADifferential(InvariantViolation):
    """d does not raise degree by one, or d o d != 0."""

    def __init__(self, message: str, generator: str | None = None):
        super().__init__(message)
        self.generator = generator


class NotChainMap(InvariantViolation):
    pass


class InvalidFiltration(InvariantViolation):
    pass


class BadBidegree(InvariantViolation):
    pass


class NotSurjective(InvariantViolation):
    """A tower projection fails to be degreewise surjective (Mittag-Leffler)."""


class RangeUnbounded(EGFError):
    pass


class CapExceedsSystem(EGFError):
    pass


class NotStabilized(EGFError):
    """Limit cohomology has not stabilized within the supplied levels."""

    def __init__(self, message: str, degree: int | None = None):
        super().__init__(message)
        self.degree = degree


class BadRange(EGFError):
    pass


class RankDeficient(EGFError):
    pass


class BadLevels(EGFError):
    pass


class UnorderedComponents(EGFError):
    pass


class ModelParseError(EGFError):
    """Malformed model file."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
