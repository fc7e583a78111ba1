"""Exception types shared across the package.

The split mirrors the failure modes of the numerical machinery: domain
problems of a weight function, class-precondition failures, scans past a
declared horizon, missing capabilities (exact arithmetic, vectorization),
and exhausted search budgets in the constructive routines.
"""


class DensityLabError(Exception):
    """Base class for all package errors."""


class DomainError(DensityLabError):
    """An argument lies outside the valid domain of a weight function."""


class ClassError(DensityLabError):
    """A weight function does not belong to the class an operation requires."""


class HorizonError(DensityLabError):
    """A query goes past the declared scan horizon of a set or sequence."""


class HintError(DensityLabError):
    """A declared monotonicity hint is missing or violated."""


class CapabilityError(DensityLabError):
    """The input does not support the requested mode (e.g. exact rationals)."""


class DegenerateError(DensityLabError):
    """The input is degenerate for the operation (e.g. all-zero coefficients)."""


class ZeroCoefficientError(DensityLabError):
    """A coefficient required to be non-zero vanished."""


class ConditionError(DensityLabError):
    """A transform row violates its required sign/limit conditions."""


class DivergencePrereqError(DensityLabError):
    """A required divergence prerequisite was not certified within the horizon."""


class BlockCapExceeded(DensityLabError):
    """More construction blocks were requested than the exact-integer cap allows."""


class BudgetExhausted(DensityLabError):
    """A boundary search ran out of budget.

    Carries how many boundaries were found; their values are in
    ``boundaries`` (including the leading 0).
    """

    def __init__(self, k_reached: int, boundaries=(), message: str = ""):
        self.k_reached = k_reached
        self.boundaries = tuple(boundaries)
        super().__init__(
            message or f"search budget exhausted after {k_reached} boundaries"
        )


class StageBudgetExhausted(DensityLabError):
    """A staged scan could not certify the next threshold crossing."""

    def __init__(self, stage: int, partial=None, message: str = ""):
        self.stage = stage
        self.partial = partial
        super().__init__(message or f"stage {stage}: budget exhausted before crossing")
