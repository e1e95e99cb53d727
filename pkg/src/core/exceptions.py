"""Exception types raised by the motsolve package."""

from typing import Optional


class MotSolveError(Exception):
    """Base class for every error raised by motsolve."""


class EmptyRow(MotSolveError):
    """Raised when a log-domain row holds no finite entry."""

    def __init__(self, row: int):
        super().__init__(f"Row {row} has no entry above -inf")
        self.row = row


class InvalidK(MotSolveError):
    """Raised when a top-k request falls outside 1..size."""


class SingularSystem(MotSolveError):
    """Raised when a regularized symmetric solve cannot be completed."""


class SizeMismatch(MotSolveError):
    """Raised when array dimensions disagree."""


class InvalidWeight(MotSolveError):
    """Raised when marginal weights are nonpositive or do not sum to one."""


class PotentialOverflow(MotSolveError):
    """Raised when an exponential term leaves the representable range."""

    def __init__(self, term: str, argument: float):
        super().__init__(f"Exponential overflow in {term} term (argument {argument:.3g})")
        self.term = term
        self.argument = argument


class ColumnUnderflow(MotSolveError):
    """Raised when a plan column is numerically zero during column scaling."""


class ColumnScalingError(MotSolveError):
    """Raised when column sums miss the target marginal after column scaling."""


class LineSearchFailed(MotSolveError):
    """Raised when neither the Newton nor the gradient direction can be accepted."""


class AdaptiveStallError(MotSolveError):
    """Raised when the adaptive smoothness estimate never passes its test."""


class OracleAmbiguity(MotSolveError):
    """Raised when the LP optimum moves under a tiny cost perturbation."""


class OracleScaleError(MotSolveError):
    """Raised when an instance is too large for the dense LP oracle."""


class ZeroColumn(MotSolveError):
    """Raised when a plan column carries no mass."""


class MatrixParseError(MotSolveError):
    """Raised when a matrix file cannot be parsed."""

    def __init__(self, path: str, line: Optional[int], message: str):
        location = f"{path}:{line}" if line is not None else path
        super().__init__(f"{location}: {message}")
        self.path = path
        self.line = line


class WarmStartError(MotSolveError):
    """Raised when a solve inside the regularization schedule fails."""

    def __init__(self, level: int, eta: float, cause: Exception):
        super().__init__(f"Warm start failed at level {level} (eta={eta:g}): {cause}")
        self.level = level
        self.eta = eta


class PivotLimitExceeded(MotSolveError):
    """Raised when the dense simplex exceeds its pivot budget."""
