"""Exception hierarchy shared across the package."""


class DomainError(ValueError):
    """An input violates a documented precondition."""


class DegenerateModelError(DomainError):
    """Requested model cannot be fit (e.g. more states than the data supports)."""


class TraceParseError(ValueError):
    """A trace file is syntactically malformed."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class TraceValidationError(ValueError):
    """A trace file parsed but violates an invariant (units, ordering, ranges)."""
