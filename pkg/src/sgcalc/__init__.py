"""Bivariate spectral multipliers on Sierpinski gasket graph approximations."""
from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:        # running from a source tree
    __version__ = "0.1.0"

from .errors import (BudgetExceeded, ConfigError, ConvergenceError, DomainError,  # noqa: E402
                     SGCalcError, SingularSymbolError, SymmetryError, UnderResolvedError)

__all__ = [
    "__version__", "SGCalcError", "DomainError", "ConvergenceError", "SymmetryError",
    "SingularSymbolError", "BudgetExceeded", "UnderResolvedError", "ConfigError",
]
