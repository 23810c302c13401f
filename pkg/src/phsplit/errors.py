"""Exception types raised across the package.

Validation problems (bad shapes, bad parameters, bad configs) derive from
``ValueError`` so generic callers can catch them uniformly; numerical
failures (singular linear systems) derive from ``RuntimeError``.
"""

from __future__ import annotations

__all__ = [
    "DimensionMismatch",
    "WeightNotSPD",
    "NotDissipative",
    "CouplingNotMonotone",
    "SingularResolvent",
    "EmptyList",
    "GridMismatch",
    "SamplingMismatch",
    "NegativeOmega",
    "SingularStep",
    "SingularCoupling",
    "SingularClosedLoop",
    "OmegaZero",
    "NotPSOP",
    "BadParams",
    "NonconformingInterface",
    "ParseError",
    "ValidationError",
]


class DimensionMismatch(ValueError):
    """Array shapes are inconsistent with each other or with the declared dims."""


class WeightNotSPD(ValueError):
    """Energy weight is not symmetric positive definite."""


class NotDissipative(ValueError):
    """A dissipativity certificate was required but does not hold."""


class CouplingNotMonotone(ValueError):
    """Coupling matrix has a symmetric part that is not negative semidefinite."""


class SingularResolvent(RuntimeError):
    """(sI - A) is singular at the requested frequency."""


class EmptyList(ValueError):
    """An operation that needs at least one element received none."""


class GridMismatch(ValueError):
    """Trajectories live on different time grids."""


class SamplingMismatch(ValueError):
    """Trajectory has the wrong sampling (node vs midpoint) for the operation."""


class NegativeOmega(ValueError):
    """Exponential weight rate must be nonnegative."""


class SingularStep(RuntimeError):
    """Per-step linear system of the discrete resolvent is singular."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"singular step matrix at step {step}")


class SingularCoupling(RuntimeError):
    """(I - lambda*N_c) is singular and the coupling resolvent does not exist."""


class SingularClosedLoop(RuntimeError):
    """Monolithic step matrix is singular; closed loop has no discrete solution."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"singular closed-loop matrix at step {step}")


class OmegaZero(ValueError):
    """Weighted-norm convergence bound requires a strictly positive rate."""


class NotPSOP(ValueError):
    """Output-passivity margin is zero/absent; the output bound does not apply."""


class BadParams(ValueError):
    """Model parameters out of range (counts, signs, coefficient values)."""


class NonconformingInterface(ValueError):
    """Interface port grids of two coupled bodies do not match."""


class ParseError(ValueError):
    """Config document could not be parsed."""


class ValidationError(ValueError):
    """Config parsed but a field failed validation."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
