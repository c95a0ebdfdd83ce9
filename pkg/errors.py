"""
Exception hierarchy for the gamma belief network engine.

Every failure the library raises on purpose derives from `PGBNError`, so the
command surface can catch one type and turn it into a machine-parsable line.
"""


class PGBNError(Exception):
    """Base class for all engine errors."""


class InvalidParameterError(PGBNError, ValueError):
    """A distribution or operation parameter is outside its domain."""


class CapacityError(PGBNError, ValueError):
    """A lookup exceeds the capacity of a precomputed table."""


class DegenerateWeightsError(PGBNError, ValueError):
    """A positive count has to be split over all-zero weights."""


class ParseError(PGBNError, ValueError):
    """A corpus or vocabulary file is malformed."""

    def __init__(self, message: str, line_number: int = 0, path: str = ""):
        self.line_number = line_number
        self.path = path
        where = f"{path}:{line_number}: " if path else f"line {line_number}: "
        super().__init__(f"{where}{message}")


class DimensionError(PGBNError, ValueError):
    """Array or matrix shapes do not agree."""


class ModelError(PGBNError, ValueError):
    """A model object is inconsistent with the request made of it."""


class SerializationError(PGBNError):
    """A network file cannot be read back."""


class InvariantViolationError(SerializationError):
    """A loaded object breaks one of its structural invariants."""


class NumericDomainError(PGBNError, ArithmeticError):
    """A conditional would be evaluated with an invalid scale or rate."""


class StructureError(PGBNError):
    """Layer-wise structure learning cannot proceed."""


class ConfigError(PGBNError, ValueError):
    """A run configuration is incomplete or invalid."""
