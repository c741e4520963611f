"""Exception hierarchy."""

from __future__ import annotations


class QmajError(ValueError):
    """Base class for input and precondition failures."""


class DimensionError(QmajError):
    pass


class NotHermitianError(QmajError):
    pass


class NotPSDError(QmajError):
    pass


class TraceError(QmajError):
    pass


class NotUnitaryError(QmajError):
    pass


class DistributionError(QmajError):
    pass


class CompletenessError(QmajError):
    pass


class SumMismatchError(QmajError):
    pass


class FormatError(QmajError):
    """Malformed file payload (bad JSON, NaN/Inf, wrong shape)."""


class InfeasibleError(QmajError):
    """A majorization precondition does not hold.

    ``index`` is the 1-based partial-sum index k at which the relation
    fails (``None`` when the failure is the total-sum check), ``slack`` the
    signed slack at that index.
    """

    def __init__(self, message: str, index: int | None = None, slack: float | None = None):
        super().__init__(message)
        self.index = index
        self.slack = slack


class ConvergenceError(RuntimeError):
    """Iterative eigensolver hit its sweep cap."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual
