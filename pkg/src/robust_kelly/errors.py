"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input data violates a documented invariant."""


class DimensionError(ValidationError):
    """Mismatched shapes between market, bets, and distributions."""


class InfeasibleError(ValidationError):
    """A constraint set that must be nonempty is empty."""


class GrowthDomainError(ValueError):
    """Evaluation requested at a point where log growth is -inf."""


class SolverFailure(RuntimeError):
    """A numerical subroutine could not certify its result."""
