"""Exception hierarchy shared by all modules.

DomainError signals arguments outside a documented contract and maps to
CLI exit code 3. The numerical-consistency family signals computations
whose internal cross-checks failed and maps to exit code 2.
"""


class DomainError(ValueError):
    """Argument outside the documented domain of an operation."""


class NumericalConsistencyError(RuntimeError):
    """An internal cross-check failed (imaginary residue, non-finite sample)."""

    def __init__(self, message, *, at=None):
        super().__init__(message)
        self.at = at


class CancellationError(NumericalConsistencyError):
    """Catastrophic cancellation detected; the value is refused."""


class DegenerateDenominatorError(NumericalConsistencyError):
    """A variance factor in a correlation ratio is not positive."""
