"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage/config problems exit 2,
model-domain errors exit 3, estimation/convergence failures exit 4.
"""


class QpercError(Exception):
    """Base class for all package errors."""


class DomainError(QpercError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class DivergenceError(DomainError):
    """A series or observable is divergent at the requested parameters."""


class ConvergenceError(QpercError, RuntimeError):
    """Iterative solver failed to converge within its iteration budget."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class EstimationError(QpercError, RuntimeError):
    """A statistical estimate cannot be formed from the given data."""


class SizeGuardError(QpercError, ValueError):
    """Exhaustive enumeration refused: state space exceeds the guard."""
