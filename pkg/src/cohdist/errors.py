"""Exception types shared across the package."""


class CoherenceError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(CoherenceError):
    """Operands live on spaces of different dimension."""


class InvalidDistribution(CoherenceError):
    """A vector that should be a probability distribution is not one."""


class ConvergenceFailure(CoherenceError):
    """An iterative linear algebra routine did not converge."""


class SolverFailure(CoherenceError):
    """A conic solve did not certify an optimal solution.

    Carries the offending solution object (when one exists) so callers
    can inspect the certified gap and residuals.
    """

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class InvalidWitness(CoherenceError):
    """A witness operator violates its feasibility conditions."""


class InvalidStateFile(CoherenceError):
    """A state file failed to parse or validate."""


class ResourceLimit(CoherenceError):
    """A query would exceed the configured resource bounds."""


class UnsupportedCombination(CoherenceError):
    """The requested operation class does not apply to this input."""
