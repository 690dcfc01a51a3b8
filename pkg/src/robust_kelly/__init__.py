"""Kelly gambling over finite outcome spaces, nominal and distributionally robust.

The package models a betting market (returns matrix plus polyhedral bet
constraints), five families of ambiguity sets over the outcome
distribution, exact worst-case oracles with dual certificates for each
family, and a cutting-plane bet optimizer with certified suboptimality
gaps.  A horse-race experiment generator and a JSON/CSV command-line
front end sit on top.
"""

from .ambiguity import (
    AmbiguitySet,
    Box,
    ConvexHull,
    DivergenceBall,
    NormBall,
    Polyhedral,
    Singleton,
    WassersteinBall,
    contains,
    divergence_value,
    wasserstein_distance,
)
from .divergences import (
    HELLINGER,
    KL,
    NEYMAN_CHI2,
    PEARSON_CHI2,
    REVERSE_KL,
    TOTAL_VARIATION,
    ConjugatePair,
    DivergenceKind,
    alpha_divergence,
    conjugate_table,
)
from .duals import (
    BoxDuals,
    DivergenceDuals,
    NormBallDuals,
    PolyhedralDuals,
    WassersteinDuals,
    dual_value_box,
    dual_value_divergence,
    dual_value_normball,
    dual_value_polyhedral,
    dual_value_wasserstein,
)
from .errors import (
    DimensionError,
    GrowthDomainError,
    InfeasibleError,
    SolverFailure,
    ValidationError,
)
from .horserace import (
    CANONICAL_SEED,
    HorseRaceInstance,
    SweepResult,
    ball_family,
    box_family,
    make_instance,
    place_distribution,
    place_returns,
    run_sweep,
    sample_beta,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .linprog import LinearProgram, LpSolution, LpStatus, solve_lp
from .market import (
    Bet,
    BetConstraintSet,
    BettingMarket,
    Distribution,
    growth_supergradient,
    log_growth,
)
from .oracle import WorstCaseResult, worst_case
from .solver import SolveReport, certify, solve_drkp, solve_kelly

__version__ = "0.1.0"

__all__ = [
    "AmbiguitySet",
    "Bet",
    "BetConstraintSet",
    "BettingMarket",
    "Box",
    "BoxDuals",
    "CANONICAL_SEED",
    "ConjugatePair",
    "ConvexHull",
    "DimensionError",
    "Distribution",
    "DivergenceBall",
    "DivergenceDuals",
    "DivergenceKind",
    "GrowthDomainError",
    "HELLINGER",
    "HorseRaceInstance",
    "InfeasibleError",
    "KERNEL_BACKEND",
    "KL",
    "LinearProgram",
    "LpSolution",
    "LpStatus",
    "NEYMAN_CHI2",
    "NormBall",
    "NormBallDuals",
    "PEARSON_CHI2",
    "Polyhedral",
    "PolyhedralDuals",
    "REVERSE_KL",
    "Singleton",
    "SolveReport",
    "SolverFailure",
    "SweepResult",
    "TOTAL_VARIATION",
    "ValidationError",
    "WassersteinBall",
    "WassersteinDuals",
    "WorstCaseResult",
    "alpha_divergence",
    "ball_family",
    "box_family",
    "certify",
    "conjugate_table",
    "contains",
    "divergence_value",
    "dual_value_box",
    "dual_value_divergence",
    "dual_value_normball",
    "dual_value_polyhedral",
    "dual_value_wasserstein",
    "growth_supergradient",
    "log_growth",
    "make_instance",
    "place_distribution",
    "place_returns",
    "run_sweep",
    "sample_beta",
    "solve_drkp",
    "solve_kelly",
    "solve_lp",
    "wasserstein_distance",
    "worst_case",
]
