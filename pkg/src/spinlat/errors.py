"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: validation problems exit with 2,
budget and convergence problems with 3.
"""

import os


class SpinlatError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgument(SpinlatError, ValueError):
    pass


class GraphParseError(InvalidArgument):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BudgetExceeded(SpinlatError):
    pass


class ConvergenceFailure(SpinlatError):
    """Raised when the eigensolver runs out of matvecs.

    ``residuals`` holds the best residual norms seen so far, one per
    requested eigenpair.
    """

    def __init__(self, message, residuals=None, eigenvalues=None):
        super().__init__(message)
        self.residuals = residuals
        self.eigenvalues = eigenvalues


class NumericalValidityError(SpinlatError):
    pass


class DegenerateGapError(SpinlatError):
    pass


class NoInteriorExtremum(SpinlatError):
    pass


class UnderdeterminedFit(SpinlatError):
    pass


class LogDomainError(SpinlatError, ValueError):
    pass


BUDGET_ENV = "SPINLAT_BUDGET_OVERRIDE"


def budget_override():
    """True when the environment unlocks long-run budgets."""
    return os.environ.get(BUDGET_ENV, "").strip().lower() in {"1", "true", "yes", "on"}
