"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: validation failures exit 1,
infeasible schedules exit 2, internal invariant violations exit 3.
"""


class TreeHarmonicsError(Exception):
    """Base class for all package errors."""


class ValidationError(TreeHarmonicsError):
    """Bad input: malformed tree spec, row not summing to one, out-of-range index."""

    def __init__(self, message: str, issues: list[str] | None = None):
        super().__init__(message)
        self.issues = list(issues) if issues else [message]


class DimensionMismatchError(ValidationError):
    """Operands with incompatible vector dimension or tuple width."""


class InfeasibleScheduleError(TreeHarmonicsError):
    """A block plan that cannot reach its accuracy targets in the available depth."""


class InvariantError(TreeHarmonicsError):
    """An internal guarantee failed; indicates a bug, never bad user input."""
