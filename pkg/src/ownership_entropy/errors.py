"""Domain errors raised by the ownership-entropy library.

Every error derives from ``ValueError`` so callers that only care about
"bad input" can keep catching the builtin, while the CLI maps each class to
a structured error report.
"""

from typing import List, Tuple


class OwnershipEntropyError(ValueError):
    """Base class for all library errors."""

    kind = "error"


class EdgeListParseError(OwnershipEntropyError):
    """Edge-list rows that could not be parsed.

    Attributes:
        errors: list of (line_number, message) tuples, one per bad row
    """

    kind = "parse_error"

    def __init__(self, errors: List[Tuple[int, str]]):
        self.errors = list(errors)
        first_line, first_msg = self.errors[0] if self.errors else (0, "unknown")
        super().__init__(
            f"{len(self.errors)} malformed row(s); first at line {first_line}: {first_msg}"
        )


class EmptyInputError(OwnershipEntropyError):
    kind = "empty_input"


class DegenerateSampleError(OwnershipEntropyError):
    kind = "degenerate_sample"


class SupportRangeError(OwnershipEntropyError):
    kind = "range_error"


class EmptySupportError(OwnershipEntropyError):
    kind = "empty_support"


class ParameterDomainError(OwnershipEntropyError):
    kind = "parameter_domain"


class InsufficientDataError(OwnershipEntropyError):
    kind = "insufficient_data"


class ShapeMismatchError(OwnershipEntropyError):
    kind = "shape_error"


class ConfigurationError(OwnershipEntropyError):
    kind = "configuration_error"
