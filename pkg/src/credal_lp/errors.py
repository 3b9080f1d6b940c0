"""Exception hierarchy shared by every module."""


class CredalLpError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(CredalLpError, ValueError):
    """A precondition or type invariant was violated."""


class UnboundedFunctionError(CredalLpError, ArithmeticError):
    """A function returned a non-finite value where boundedness is required."""


class EmptyAfterFilterError(CredalLpError):
    """No candidate has a strictly positive guaranteed objective."""


class DimensionLimitError(CredalLpError):
    """Problem is larger than the exhaustive vertex enumeration allows."""


class BudgetExceededError(CredalLpError):
    """An enumeration would exceed its evaluation budget."""


class WrongModelError(CredalLpError, TypeError):
    """Operation requires a different uncertainty model."""


class RankDeficiencyError(CredalLpError, ArithmeticError):
    """Least-squares system is singular."""


class InsufficientResidualsError(CredalLpError):
    """Too few residuals to build an imprecise band."""


class ConfigError(CredalLpError):
    """Invalid run configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
