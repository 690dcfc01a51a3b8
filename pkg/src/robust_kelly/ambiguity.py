"""The five families of distribution ambiguity sets.

Every set lives inside the K-outcome probability simplex.  Construction
validates the family parameters and that the set is nonempty; membership
(`contains`) takes an explicit tolerance, defaulting to 1e-8, so that
feasibility means the same thing to the oracles, the duals, and the
tests.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .divergences import DivergenceKind, f_value
from .errors import DimensionError, InfeasibleError, ValidationError
from .market import Distribution, _freeze
from .linprog import LinearProgram, LpStatus, solve_lp

DEFAULT_MEMBER_TOL = 1e-8

__all__ = [
    "AmbiguitySet",
    "Singleton",
    "ConvexHull",
    "Polyhedral",
    "Box",
    "NormBall",
    "DivergenceBall",
    "WassersteinBall",
    "contains",
    "divergence_value",
    "wasserstein_distance",
    "DEFAULT_MEMBER_TOL",
]


class AmbiguitySet:
    """Base class; concrete families implement `_member(pi, tol)`."""

    K: int

    def contains(self, pi: Distribution, tol: float = DEFAULT_MEMBER_TOL) -> bool:
        if pi.K != self.K:
            raise DimensionError(f"distribution has {pi.K} entries, set lives in K={self.K}")
        return self._member(pi.probs, tol)

    def _member(self, p: np.ndarray, tol: float) -> bool:  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Singleton(AmbiguitySet):
    pi_nom: Distribution

    def __post_init__(self):
        object.__setattr__(self, "K", self.pi_nom.K)

    def _member(self, p, tol):
        return bool(np.max(np.abs(p - self.pi_nom.probs)) <= tol)


@dataclass(frozen=True, eq=False)
class ConvexHull(AmbiguitySet):
    """Convex hull of finitely many distributions (vertices stacked s x K)."""

    vertices: Sequence[Distribution]

    def __post_init__(self):
        if len(self.vertices) < 1:
            raise ValidationError("hull needs at least one vertex")
        K = self.vertices[0].K
        if any(v.K != K for v in self.vertices):
            raise DimensionError("hull vertices have mixed dimensions")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "V", _freeze(np.vstack([v.probs for v in self.vertices])))

    def _member(self, p, tol):
        # distance to the hull in the sup norm, via one LP over weights
        s = self.V.shape[0]
        K = self.K
        eye_t = np.ones((K, 1))
        a_ub = np.vstack(
            [
                np.hstack([self.V.T, -eye_t]),
                np.hstack([-self.V.T, -eye_t]),
            ]
        )
        b_ub = np.concatenate([p, -p])
        lp = LinearProgram(
            c=np.concatenate([np.zeros(s), [1.0]]),
            a_ub=a_ub,
            b_ub=b_ub,
            a_eq=np.hstack([np.ones((1, s)), np.zeros((1, 1))]),
            b_eq=np.array([1.0]),
        )
        sol = solve_lp(lp)
        return sol.status == LpStatus.OPTIMAL and sol.value <= tol


@dataclass(frozen=True, eq=False)
class Polyhedral(AmbiguitySet):
    """{ pi in simplex : A0 pi = d0, A1 pi <= d1 }; either block optional."""

    K: int
    A0: Optional[np.ndarray] = None
    d0: Optional[np.ndarray] = None
    A1: Optional[np.ndarray] = None
    d1: Optional[np.ndarray] = None

    def __post_init__(self):
        for mat_name, rhs_name in (("A0", "d0"), ("A1", "d1")):
            mat, rhs = getattr(self, mat_name), getattr(self, rhs_name)
            if (mat is None) != (rhs is None):
                raise ValidationError(f"{mat_name} and {rhs_name} must be given together")
            if mat is None:
                continue
            mat = np.atleast_2d(np.asarray(mat, dtype=np.float64))
            rhs = np.atleast_1d(np.asarray(rhs, dtype=np.float64))
            if mat.shape[1] != self.K or mat.shape[0] != rhs.size:
                raise DimensionError(f"{mat_name}/{rhs_name} dimensions inconsistent with K={self.K}")
            object.__setattr__(self, mat_name, _freeze(mat))
            object.__setattr__(self, rhs_name, _freeze(rhs))
        sol = solve_lp(self._feasibility_lp())
        if sol.status != LpStatus.OPTIMAL:
            raise InfeasibleError("polyhedral distribution set is empty")

    def _feasibility_lp(self) -> LinearProgram:
        return LinearProgram(
            c=np.zeros(self.K),
            a_ub=self.A1,
            b_ub=self.d1,
            a_eq=np.vstack([np.ones((1, self.K))] + ([self.A0] if self.A0 is not None else [])),
            b_eq=np.concatenate([[1.0]] + ([self.d0] if self.d0 is not None else [])),
        )

    def _member(self, p, tol):
        ok = True
        if self.A0 is not None:
            ok = bool(np.max(np.abs(self.A0 @ p - self.d0), initial=0.0) <= tol)
        if ok and self.A1 is not None:
            ok = bool(np.max(self.A1 @ p - self.d1, initial=0.0) <= tol)
        return ok


@dataclass(frozen=True, eq=False)
class Box(AmbiguitySet):
    """{ pi in simplex : |pi - pi_nom| <= rho elementwise }."""

    pi_nom: Distribution
    rho: np.ndarray

    def __post_init__(self):
        rho = np.broadcast_to(np.asarray(self.rho, dtype=np.float64), (self.pi_nom.K,)).copy()
        if np.min(rho) < 0.0:
            raise ValidationError("box radii must be nonnegative")
        object.__setattr__(self, "rho", _freeze(rho))
        object.__setattr__(self, "K", self.pi_nom.K)

    @property
    def lo(self) -> np.ndarray:
        return np.maximum(self.pi_nom.probs - self.rho, 0.0)

    @property
    def hi(self) -> np.ndarray:
        return self.pi_nom.probs + self.rho

    def as_polyhedral(self) -> Polyhedral:
        """The stacked +/- identity construction of the same set."""
        K = self.K
        A1 = np.vstack([np.eye(K), -np.eye(K)])
        d1 = np.concatenate([self.pi_nom.probs + self.rho, self.rho - self.pi_nom.probs])
        return Polyhedral(K=K, A1=A1, d1=d1)

    def _member(self, p, tol):
        return bool(np.max(np.abs(p - self.pi_nom.probs) - self.rho) <= tol)


@dataclass(frozen=True, eq=False)
class NormBall(AmbiguitySet):
    """{ pi in simplex : ||W^-1 (pi - pi_nom)||_p <= 1 }, W nonsingular."""

    pi_nom: Distribution
    W: np.ndarray
    p: float

    def __post_init__(self):
        K = self.pi_nom.K
        W = np.atleast_2d(np.asarray(self.W, dtype=np.float64))
        if W.shape != (K, K):
            raise DimensionError(f"W must be {K}x{K}")
        if not (self.p >= 1.0):
            raise ValidationError("p must be >= 1 (inf allowed)")
        cond = np.linalg.cond(W)
        if not np.isfinite(cond) or cond > 1e12:
            raise ValidationError(f"W is numerically singular (cond {cond:.2e})")
        object.__setattr__(self, "W", _freeze(W))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "W_inv", _freeze(np.linalg.inv(W)))

    @property
    def q(self) -> float:
        """Hoelder exponent: 1/p + 1/q = 1."""
        if self.p == 1.0:
            return np.inf
        if np.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    def radius(self, p_vec: np.ndarray) -> float:
        z = self.W_inv @ (p_vec - self.pi_nom.probs)
        return float(np.linalg.norm(z, ord=(np.inf if np.isinf(self.p) else self.p)))

    def _member(self, p, tol):
        return self.radius(p) <= 1.0 + tol


@dataclass(frozen=True, eq=False)
class DivergenceBall(AmbiguitySet):
    """{ pi in simplex : D_f(pi || pi_nom) <= epsilon }, pi_nom > 0."""

    pi_nom: Distribution
    kind: DivergenceKind
    epsilon: float

    def __post_init__(self):
        if np.min(self.pi_nom.probs) <= 0.0:
            raise ValidationError("divergence sets need a strictly positive nominal distribution")
        if not (self.epsilon > 0.0):
            raise ValidationError("epsilon must be positive")
        object.__setattr__(self, "K", self.pi_nom.K)
        object.__setattr__(self, "epsilon", float(self.epsilon))

    def divergence(self, p: np.ndarray) -> float:
        nom = self.pi_nom.probs
        return float(np.sum(nom * np.atleast_1d(f_value(self.kind, p / nom))))

    def _member(self, p, tol):
        return self.divergence(p) <= self.epsilon + tol


@dataclass(frozen=True, eq=False)
class WassersteinBall(AmbiguitySet):
    """{ pi in simplex : D_c(pi, pi_nom) <= s } for transport cost c."""

    pi_nom: Distribution
    cost: np.ndarray
    s: float

    def __post_init__(self):
        K = self.pi_nom.K
        cost = np.atleast_2d(np.asarray(self.cost, dtype=np.float64))
        if cost.shape != (K, K):
            raise DimensionError(f"cost must be {K}x{K}")
        if np.min(cost) < 0.0:
            raise ValidationError("transport costs must be nonnegative")
        if np.max(np.abs(np.diag(cost))) > 0.0:
            raise ValidationError("transport cost must have a zero diagonal")
        if not (self.s > 0.0):
            raise ValidationError("transport budget s must be positive")
        object.__setattr__(self, "cost", _freeze(cost))
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "K", K)

    def _member(self, p, tol):
        return wasserstein_distance(p, self.pi_nom.probs, self.cost) <= self.s + tol


def wasserstein_distance(pi, pi_nom, cost) -> float:
    """Minimum transport cost moving pi_nom to pi (both on the simplex)."""
    pi = np.asarray(pi, dtype=np.float64)
    pi_nom = np.asarray(pi_nom, dtype=np.float64)
    cost = np.asarray(cost, dtype=np.float64)
    K = pi.size
    # variables Q flattened row-major: rows marginal -> pi, cols -> pi_nom
    rows = sp.kron(sp.eye(K), np.ones((1, K)), format="csr")
    cols = sp.kron(np.ones((1, K)), sp.eye(K), format="csr")
    a_eq = sp.vstack([rows, cols], format="csr")
    b_eq = np.concatenate([pi, pi_nom])
    lp = LinearProgram(c=cost.ravel(), a_eq=a_eq, b_eq=b_eq)
    sol = solve_lp(lp)
    if sol.status != LpStatus.OPTIMAL:
        raise InfeasibleError(f"transport LP failed: {sol.status.value}")
    return float(sol.value)


def divergence_value(kind: DivergenceKind, pi: Distribution, pi_nom: Distribution) -> float:
    """D_f(pi || pi_nom) = sum_k nom_k f(pi_k / nom_k); requires nom > 0."""
    if pi.K != pi_nom.K:
        raise DimensionError("distributions have different dimensions")
    if np.min(pi_nom.probs) <= 0.0:
        raise ValidationError("divergence needs a strictly positive reference distribution")
    nom = pi_nom.probs
    return float(np.sum(nom * np.atleast_1d(f_value(kind, pi.probs / nom))))


def contains(aset: AmbiguitySet, pi: Distribution, tol: float = DEFAULT_MEMBER_TOL) -> bool:
    """Membership test for any ambiguity-set family."""
    return aset.contains(pi, tol)
