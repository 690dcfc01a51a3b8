"""Betting market model: returns matrix, bet constraints, and log growth.

A market has n bets and K possible outcomes.  Column k of the return
matrix R holds the per-dollar payoffs of each bet when outcome k occurs,
so R'b is the vector of wealth growth factors across outcomes.  Growth
rates are expected logs of those factors; they are -inf (not an error)
when an outcome with positive probability pays nothing.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DimensionError, GrowthDomainError, InfeasibleError, ValidationError
from .kernels import growth_vector
from .linprog import LinearProgram, LpStatus, solve_lp

SIMPLEX_TOL = 1e-9

__all__ = [
    "Distribution",
    "Bet",
    "BetConstraintSet",
    "BettingMarket",
    "log_growth",
    "growth_supergradient",
    "SIMPLEX_TOL",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


def _as_point_on_simplex(values, what: str) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValidationError(f"{what} must be a nonempty vector")
    if np.min(v) < -SIMPLEX_TOL:
        raise ValidationError(f"{what} has a negative entry ({np.min(v):.3e})")
    total = float(v.sum())
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise ValidationError(f"{what} sums to {total!r}, not 1")
    v = np.maximum(v, 0.0)
    return _freeze(v / v.sum())


@dataclass(frozen=True, eq=False)
class Distribution:
    """Point in the probability simplex over the K outcomes."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _as_point_on_simplex(self.probs, "distribution"))

    @property
    def K(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, K: int) -> "Distribution":
        return cls(np.full(K, 1.0 / K))

    @classmethod
    def point_mass(cls, K: int, k: int) -> "Distribution":
        p = np.zeros(K)
        p[k] = 1.0
        return cls(p)


@dataclass(frozen=True, eq=False)
class Bet:
    """Allocation of one unit of wealth across the n bets."""

    alloc: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alloc", _as_point_on_simplex(self.alloc, "bet"))

    @property
    def n(self) -> int:
        return self.alloc.size


@dataclass(frozen=True, eq=False)
class BetConstraintSet:
    """Polyhedral bet set { b : 1'b = 1, lower <= b <= upper, F b <= g }.

    Constructed sets are always subsets of the simplex (lower >= 0) and
    are checked nonempty by one feasibility LP.
    """

    n: int
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    linear_ineq: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def __post_init__(self):
        lower = np.zeros(self.n) if self.lower is None else np.asarray(self.lower, dtype=np.float64)
        upper = np.ones(self.n) if self.upper is None else np.asarray(self.upper, dtype=np.float64)
        if lower.shape != (self.n,) or upper.shape != (self.n,):
            raise DimensionError("bound vectors must have length n")
        if np.min(lower) < 0.0 or np.max(lower) > 1.0 or np.min(upper) < 0.0 or np.max(upper) > 1.0:
            raise ValidationError("bounds must lie in [0, 1]")
        if np.any(lower > upper):
            raise ValidationError("lower bound exceeds upper bound")
        object.__setattr__(self, "lower", _freeze(lower))
        object.__setattr__(self, "upper", _freeze(upper))
        if self.linear_ineq is not None:
            F, g = self.linear_ineq
            F = np.atleast_2d(np.asarray(F, dtype=np.float64))
            g = np.atleast_1d(np.asarray(g, dtype=np.float64))
            if F.shape[1] != self.n or F.shape[0] != g.size:
                raise DimensionError("linear inequality dimensions inconsistent with n")
            object.__setattr__(self, "linear_ineq", (_freeze(F), _freeze(g)))
        sol = solve_lp(self._feasibility_lp())
        if sol.status == LpStatus.INFEASIBLE:
            raise InfeasibleError("bet constraint set is empty")
        if sol.status != LpStatus.OPTIMAL:
            raise InfeasibleError(f"feasibility check failed: {sol.message}")

    def _feasibility_lp(self) -> LinearProgram:
        a_ub = b_ub = None
        if self.linear_ineq is not None:
            a_ub, b_ub = self.linear_ineq
        return LinearProgram(
            c=np.zeros(self.n),
            a_ub=a_ub,
            b_ub=b_ub,
            a_eq=np.ones((1, self.n)),
            b_eq=np.array([1.0]),
            lb=self.lower,
            ub=self.upper,
        )

    def contains(self, b: Bet, tol: float = 1e-8) -> bool:
        v = b.alloc
        if v.size != self.n:
            return False
        ok = np.all(v >= self.lower - tol) and np.all(v <= self.upper + tol)
        if ok and self.linear_ineq is not None:
            F, g = self.linear_ineq
            ok = bool(np.all(F @ v <= g + tol))
        return bool(ok)

    def argmax_linear(self, coeffs: np.ndarray) -> Tuple[np.ndarray, float]:
        """Maximize coeffs'b over the set (the solver's linear subproblem)."""
        a_ub = b_ub = None
        if self.linear_ineq is not None:
            a_ub, b_ub = self.linear_ineq
        lp = LinearProgram(
            c=-np.asarray(coeffs, dtype=np.float64),
            a_ub=a_ub,
            b_ub=b_ub,
            a_eq=np.ones((1, self.n)),
            b_eq=np.array([1.0]),
            lb=self.lower,
            ub=self.upper,
        )
        sol = solve_lp(lp)
        if sol.status != LpStatus.OPTIMAL:
            raise InfeasibleError(f"linear subproblem over bet set failed: {sol.status.value}")
        return sol.x, -sol.value

    def interior_point(self) -> np.ndarray:
        """Deterministic starting point well inside the set.

        Without extra linear inequalities this interpolates between the
        bound vectors; otherwise it is a Chebyshev-style max-slack LP.
        """
        if self.linear_ineq is None:
            lo, up = self.lower, self.upper
            span = float(np.sum(up - lo))
            if span <= 0.0:
                return lo.copy()
            t = (1.0 - float(lo.sum())) / span
            return lo + t * (up - lo)
        F, g = self.linear_ineq
        n = self.n
        # variables (b, m): maximize slack m
        row_norms = np.maximum(np.linalg.norm(F, axis=1), 1.0)
        a_ub = np.hstack([F, row_norms[:, None]])
        b_ub = g.copy()
        # b >= lower + m, b <= upper - m
        a_lo = np.hstack([-np.eye(n), np.ones((n, 1))])
        a_hi = np.hstack([np.eye(n), np.ones((n, 1))])
        lp = LinearProgram(
            c=np.concatenate([np.zeros(n), [-1.0]]),
            a_ub=np.vstack([a_ub, a_lo, a_hi]),
            b_ub=np.concatenate([b_ub, -self.lower, self.upper]),
            a_eq=np.hstack([np.ones((1, n)), np.zeros((1, 1))]),
            b_eq=np.array([1.0]),
            lb=np.concatenate([self.lower, [0.0]]),
            ub=np.concatenate([self.upper, [np.inf]]),
        )
        sol = solve_lp(lp)
        if sol.status != LpStatus.OPTIMAL:
            raise InfeasibleError("interior point LP failed")
        return sol.x[:n]


@dataclass(frozen=True, eq=False)
class BettingMarket:
    """n-bet, K-outcome market with nonnegative returns matrix R (n x K)."""

    R: np.ndarray
    bet_constraints: Optional[BetConstraintSet] = None

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.R, dtype=np.float64))
        if R.ndim != 2 or R.size == 0:
            raise ValidationError("returns matrix must be 2-D and nonempty")
        if np.min(R) < 0.0:
            raise ValidationError("returns must be nonnegative")
        if np.any(R.max(axis=0) <= 0.0):
            raise ValidationError("every outcome needs at least one bet with positive return")
        object.__setattr__(self, "R", _freeze(R))
        if self.bet_constraints is None:
            object.__setattr__(self, "bet_constraints", BetConstraintSet(n=R.shape[0]))
        elif self.bet_constraints.n != R.shape[0]:
            raise DimensionError("bet constraint set dimension differs from number of bets")

    @property
    def n(self) -> int:
        return self.R.shape[0]

    @property
    def K(self) -> int:
        return self.R.shape[1]

    def payoffs(self, b: Bet) -> np.ndarray:
        """Wealth growth factor R'b per outcome."""
        if b.n != self.n:
            raise DimensionError(f"bet has {b.n} entries, market has {self.n} bets")
        return self.R.T @ b.alloc

    def log_payoffs(self, b: Bet) -> np.ndarray:
        """log(R'b) with zero payoffs mapped to -inf."""
        return growth_vector(self.payoffs(b))


def log_growth(market: BettingMarket, b: Bet, pi: Distribution) -> float:
    """Mean log growth rate: sum_k pi_k log(r_k'b); -inf on the boundary."""
    if pi.K != market.K:
        raise DimensionError(f"distribution has {pi.K} entries, market has {market.K} outcomes")
    x = market.log_payoffs(b)
    active = pi.probs > 0.0
    if np.any(np.isneginf(x[active])):
        return -np.inf
    return float(pi.probs[active] @ x[active])


def growth_supergradient(market: BettingMarket, b: Bet, pi: Distribution) -> np.ndarray:
    """Gradient of the log growth rate with respect to the allocation."""
    if pi.K != market.K:
        raise DimensionError(f"distribution has {pi.K} entries, market has {market.K} outcomes")
    y = market.payoffs(b)
    active = pi.probs > 0.0
    if np.any(y[active] <= 0.0):
        raise GrowthDomainError("supergradient undefined: an active outcome pays zero")
    w = np.zeros(market.K)
    w[active] = pi.probs[active] / y[active]
    return market.R @ w
