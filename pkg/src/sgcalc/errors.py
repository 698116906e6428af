"""Exception types shared across the package."""


class SGCalcError(Exception):
    """Base class for all errors raised by sgcalc."""


class DomainError(SGCalcError, ValueError):
    """An argument lies outside the domain of a map."""


class ConvergenceError(SGCalcError, RuntimeError):
    """An iteration did not reach its tolerance within the iteration cap."""


class SymmetryError(SGCalcError, ValueError):
    """A matrix that must be symmetric is not."""


class SingularSymbolError(SGCalcError, ArithmeticError):
    """A multiplier symbol is singular (non-finite) where it must be evaluated."""


class BudgetExceeded(SGCalcError, MemoryError):
    """A computation would exceed its configured size budget."""


class UnderResolvedError(SGCalcError, RuntimeError):
    """Two grid resolutions disagree by more than the allowed bound."""


class ConfigError(SGCalcError, ValueError):
    """An experiment configuration failed validation."""
