"""Dual reformulations of worst-case growth, one per ambiguity family.

Each family's worst-case growth over the set equals the supremum of an
explicit concave dual function; any feasible dual point is a lower bound
(weak duality), and maximizing it recovers the worst-case value exactly.
These forms are what make the robust Kelly problem a single convex
maximization, and they double as optimality certificates for the primal
oracles.

Throughout, ``x`` denotes the vector of log payoffs log(R'b).
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import logsumexp

from .ambiguity import Box, DivergenceBall, NormBall, Polyhedral, WassersteinBall
from .divergences import (
    DivergenceKind,
    conjugate,
    conjugate_domain_sup,
    conjugate_prime,
    perspective,
)
from .errors import DimensionError, ValidationError
from .linprog import LinearProgram, LpStatus, solve_lp
from .market import Bet, BettingMarket

__all__ = [
    "PolyhedralDuals",
    "BoxDuals",
    "NormBallDuals",
    "DivergenceDuals",
    "WassersteinDuals",
    "dual_value_polyhedral",
    "dual_value_box",
    "dual_value_normball",
    "dual_value_divergence",
    "dual_value_wasserstein",
    "maximize_dual_polyhedral",
    "maximize_dual_box",
    "maximize_dual_normball",
    "maximize_dual_divergence",
    "maximize_dual_wasserstein",
]


@dataclass(frozen=True)
class PolyhedralDuals:
    nu: np.ndarray  # equality multipliers, free
    lam: np.ndarray  # inequality multipliers, >= 0


@dataclass(frozen=True)
class BoxDuals:
    lam: np.ndarray  # signed: lam_plus - lam_minus


@dataclass(frozen=True)
class NormBallDuals:
    u: np.ndarray  # u <= log(R'b) elementwise
    mu: float


@dataclass(frozen=True)
class DivergenceDuals:
    lam: float  # >= 0
    gamma: float
    w: np.ndarray
    z: np.ndarray


@dataclass(frozen=True)
class WassersteinDuals:
    lam: float  # >= 0


def _log_payoffs(market: BettingMarket, b: Bet) -> np.ndarray:
    return market.log_payoffs(b)


# ---------------------------------------------------------------------------
# dual value evaluators (weak-duality lower bounds for any feasible point)
# ---------------------------------------------------------------------------


def dual_value_polyhedral(market, b, aset: Polyhedral, d: PolyhedralDuals) -> float:
    """min(x + A0'nu + A1'lam) - d0'nu - d1'lam, for lam >= 0."""
    return _dual_value_polyhedral_x(_log_payoffs(market, b), aset, d)


def _dual_value_polyhedral_x(x, aset: Polyhedral, d: PolyhedralDuals) -> float:
    nu = np.zeros(0) if d.nu is None else np.atleast_1d(np.asarray(d.nu, dtype=np.float64))
    lam = np.zeros(0) if d.lam is None else np.atleast_1d(np.asarray(d.lam, dtype=np.float64))
    if np.any(lam < 0.0):
        raise ValidationError("inequality multipliers must be nonnegative")
    shifted = x.copy()
    val = 0.0
    if aset.A0 is not None:
        if nu.size != aset.A0.shape[0]:
            raise DimensionError("nu has the wrong length")
        shifted = shifted + aset.A0.T @ nu
        val -= float(aset.d0 @ nu)
    if aset.A1 is not None:
        if lam.size != aset.A1.shape[0]:
            raise DimensionError("lam has the wrong length")
        shifted = shifted + aset.A1.T @ lam
        val -= float(aset.d1 @ lam)
    return float(np.min(shifted)) + val


def dual_value_box(market, b, aset: Box, d: BoxDuals) -> float:
    """min(x + lam) - pi_nom'lam - rho'|lam| for the signed multiplier."""
    return _dual_value_box_x(_log_payoffs(market, b), aset, d)


def _dual_value_box_x(x, aset: Box, d: BoxDuals) -> float:
    lam = np.asarray(d.lam, dtype=np.float64)
    if lam.shape != (aset.K,):
        raise DimensionError("box multiplier has the wrong length")
    return float(np.min(x + lam) - aset.pi_nom.probs @ lam - aset.rho @ np.abs(lam))


def dual_value_normball(market, b, aset: NormBall, d: NormBallDuals) -> float:
    """pi_nom'u - ||W'(u - mu 1)||_q, requiring u <= log(R'b)."""
    return _dual_value_normball_x(_log_payoffs(market, b), aset, d)


def _dual_value_normball_x(x, aset: NormBall, d: NormBallDuals) -> float:
    u = np.asarray(d.u, dtype=np.float64)
    if u.shape != (aset.K,):
        raise DimensionError("u has the wrong length")
    if np.any(u > x + 1e-12):
        return -np.inf
    q = aset.q
    v = aset.W.T @ (u - d.mu * np.ones(aset.K))
    return float(aset.pi_nom.probs @ u - np.linalg.norm(v, ord=(np.inf if np.isinf(q) else q)))


def dual_value_divergence(market, b, aset: DivergenceBall, d: DivergenceDuals) -> float:
    """-pi_nom'w - eps*lam - gamma for feasible (lam, gamma, w, z)."""
    return _dual_value_divergence_x(_log_payoffs(market, b), aset, d)


def _dual_value_divergence_x(x, aset: DivergenceBall, d: DivergenceDuals) -> float:
    if d.lam < 0.0:
        raise ValidationError("lam must be nonnegative")
    z = np.asarray(d.z, dtype=np.float64)
    w = np.asarray(d.w, dtype=np.float64)
    if z.shape != (aset.K,) or w.shape != (aset.K,):
        raise DimensionError("w/z have the wrong length")
    if np.any(z < -x - d.gamma - 1e-12):
        return -np.inf
    needed = np.atleast_1d(perspective(aset.kind, d.lam, z))
    if np.any(w < needed - 1e-12):
        return -np.inf  # infeasible duals (f* domain or epigraph violated)
    return float(-aset.pi_nom.probs @ w - aset.epsilon * d.lam - d.gamma)


def dual_value_wasserstein(market, b, aset: WassersteinBall, d: WassersteinDuals) -> float:
    """sum_j nom_j min_i (x_i + lam c_ij) - s lam."""
    return _dual_value_wasserstein_x(_log_payoffs(market, b), aset, d)


def _dual_value_wasserstein_x(x, aset: WassersteinBall, d: WassersteinDuals) -> float:
    if d.lam < 0.0:
        raise ValidationError("lam must be nonnegative")
    shifted = x[:, None] + d.lam * aset.cost
    return float(aset.pi_nom.probs @ np.min(shifted, axis=0) - aset.s * d.lam)


# ---------------------------------------------------------------------------
# dual maximizers
# ---------------------------------------------------------------------------


def maximize_dual_polyhedral(x, aset: Polyhedral, tol: float = 1e-8) -> Tuple[PolyhedralDuals, float]:
    """Epigraph LP over (nu, lam, m): maximize m - d0'nu - d1'lam."""
    K = aset.K
    m0 = 0 if aset.A0 is None else aset.A0.shape[0]
    m1 = 0 if aset.A1 is None else aset.A1.shape[0]
    cols = []
    cost = []
    if m0:
        cols.append(-aset.A0.T)
        cost.append(aset.d0)
    if m1:
        cols.append(-aset.A1.T)
        cost.append(aset.d1)
    cols.append(np.ones((K, 1)))
    a_ub = np.hstack(cols)
    c = np.concatenate(cost + [[-1.0]]) if cost else np.array([-1.0])
    lb = np.concatenate([np.full(m0, -np.inf), np.zeros(m1), [-np.inf]])
    sol = solve_lp(LinearProgram(c=c, a_ub=a_ub, b_ub=x, lb=lb), tol)
    if sol.status != LpStatus.OPTIMAL:
        raise ValidationError(f"polyhedral dual LP failed: {sol.status.value}")
    nu = sol.x[:m0] if m0 else np.zeros(0)
    lam = np.maximum(sol.x[m0 : m0 + m1], 0.0) if m1 else np.zeros(0)
    d = PolyhedralDuals(nu=nu, lam=lam)
    return d, _dual_value_polyhedral_x(x, aset, d)


def maximize_dual_box(x, aset: Box, tol: float = 1e-8) -> Tuple[BoxDuals, float]:
    """Epigraph LP over the split multiplier (lam+, lam-, m)."""
    K = aset.K
    nom = aset.pi_nom.probs
    a_ub = np.hstack([-np.eye(K), np.eye(K), np.ones((K, 1))])
    c = np.concatenate([nom + aset.rho, aset.rho - nom, [-1.0]])
    lb = np.concatenate([np.zeros(2 * K), [-np.inf]])
    sol = solve_lp(LinearProgram(c=c, a_ub=a_ub, b_ub=x, lb=lb), tol)
    if sol.status != LpStatus.OPTIMAL:
        raise ValidationError(f"box dual LP failed: {sol.status.value}")
    lam = sol.x[:K] - sol.x[K : 2 * K]
    d = BoxDuals(lam=lam)
    return d, _dual_value_box_x(x, aset, d)


def _norm_dual_grad(v, q):
    """Gradient of ||v||_q (1 < q < inf), zero-safe."""
    nv = np.linalg.norm(v, ord=q)
    if nv <= 1e-300:
        return np.zeros_like(v), 0.0
    g = np.sign(v) * (np.abs(v) / nv) ** (q - 1.0)
    return g, nv


def maximize_dual_normball(
    x,
    aset: NormBall,
    tol: float = 1e-9,
    starts: Optional[list] = None,
) -> Tuple[NormBallDuals, float]:
    """Maximize pi_nom'u - ||W'(u - mu 1)||_q over u <= x, mu free.

    Exact epigraph LP when q is 1 or inf; otherwise quasi-Newton ascent
    from one or more starting points (pass oracle-recovered duals as a
    start to certify an existing solution).
    """
    K = aset.K
    nom = aset.pi_nom.probs
    q = aset.q
    if q == 1.0 or np.isinf(q):
        return _maximize_dual_normball_lp(x, aset, tol)

    def negobj(zv):
        u, mu = zv[:K], zv[K]
        v = aset.W.T @ (u - mu)
        g, nv = _norm_dual_grad(v, q)
        val = nom @ u - nv
        grad_u = nom - aset.W @ g
        grad_mu = float(np.ones(K) @ (aset.W @ g))
        return -val, -np.concatenate([grad_u, [grad_mu]])

    cands = []
    base = float(np.min(x))
    start_list = [np.concatenate([np.full(K, base), [base]])]
    if starts:
        start_list = [np.concatenate([np.asarray(s.u, dtype=np.float64), [s.mu]]) for s in starts] + start_list
    bounds = [(None, float(xi)) for xi in x] + [(None, None)]
    for s0 in start_list:
        res = minimize(
            negobj,
            np.minimum(s0[:-1], x).tolist() + [s0[-1]],
            jac=True,
            bounds=bounds,
            method="L-BFGS-B",
            options={"maxiter": 2000, "ftol": 1e-16, "gtol": 1e-12},
        )
        u = np.minimum(res.x[:K], x)
        d = NormBallDuals(u=u, mu=float(res.x[K]))
        cands.append((_dual_value_normball_x(x, aset, d), d))
    val, d = max(cands, key=lambda t: t[0])
    return d, val


def _maximize_dual_normball_lp(x, aset: NormBall, tol: float) -> Tuple[NormBallDuals, float]:
    K = aset.K
    nom = aset.pi_nom.probs
    WT = aset.W.T
    ones = np.ones((K, 1))
    if aset.q == 1.0:
        # variables (u, mu, t[K]); t_i >= |(W'(u - mu 1))_i|
        a_rows = []
        for sgn in (1.0, -1.0):
            a_rows.append(np.hstack([sgn * WT, -sgn * (WT @ np.ones(K))[:, None], -np.eye(K)]))
        a_ub = np.vstack(a_rows)
        b_ub = np.zeros(2 * K)
        c = np.concatenate([-nom, [0.0], np.ones(K)])
        nt = K
    else:  # q = inf: single bound t >= |.|_i
        a_rows = []
        for sgn in (1.0, -1.0):
            a_rows.append(np.hstack([sgn * WT, -sgn * (WT @ np.ones(K))[:, None], -np.ones((K, 1))]))
        a_ub = np.vstack(a_rows)
        b_ub = np.zeros(2 * K)
        c = np.concatenate([-nom, [0.0], [1.0]])
        nt = 1
    lb = np.concatenate([np.full(K + 1, -np.inf), np.zeros(nt)])
    ub = np.concatenate([x, np.full(1 + nt, np.inf)])
    sol = solve_lp(LinearProgram(c=c, a_ub=a_ub, b_ub=b_ub, lb=lb, ub=ub), tol)
    if sol.status != LpStatus.OPTIMAL:
        raise ValidationError(f"norm-ball dual LP failed: {sol.status.value}")
    u = np.minimum(sol.x[:K], x)
    d = NormBallDuals(u=u, mu=float(sol.x[K]))
    return d, _dual_value_normball_x(x, aset, d)


# -- divergence dual engine --------------------------------------------------


def _divergence_gamma_root(kind: DivergenceKind, lam: float, x, nom) -> float:
    """Solve sum_k nom_k f*'((-x_k - gamma)/lam) = 1 for gamma.

    The left side is continuous and strictly decreasing from +inf (at the
    conjugate-domain boundary) to 0, so plain bisection is reliable.
    """
    if kind.name == "kl":
        return float(lam * logsumexp(np.log(nom) - x / lam))
    s_sup = conjugate_domain_sup(kind)
    xmin = float(np.min(x))

    def S(gamma):
        t = np.atleast_1d(conjugate_prime(kind, (-x - gamma) / lam))
        if np.any(np.isinf(t)):
            return np.inf
        return float(nom @ t) - 1.0

    if np.isfinite(s_sup):
        lo = -xmin - lam * s_sup
    else:
        lo = -xmin - lam * max(1.0, abs(xmin))
        span = max(1.0, abs(lo))
        while S(lo) <= 0.0 and span < 1e18:
            lo -= span
            span *= 4.0
    hi = max(-xmin + lam, lo + max(1e-12, abs(lo) * 1e-12))
    span = max(1.0, abs(hi) * 0.5, lam)
    while S(hi) > 0.0:
        hi += span
        span *= 2.0
        if span > 1e20:
            break
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if S(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _divergence_phi(kind: DivergenceKind, lam: float, x, nom, eps: float):
    """Inner-maximized dual value at fixed lam, with its gamma."""
    gamma = _divergence_gamma_root(kind, lam, x, nom)
    z = -x - gamma
    w = np.atleast_1d(perspective(kind, lam, z))
    if np.any(np.isinf(w)):
        # nudge gamma up into the domain interior
        gamma = gamma + 1e-12 * max(1.0, abs(gamma))
        z = -x - gamma
        w = np.atleast_1d(perspective(kind, lam, z))
        if np.any(np.isinf(w)):
            return -np.inf, gamma
    return float(-nom @ w - eps * lam - gamma), gamma


def maximize_dual_divergence(
    x, aset: DivergenceBall, tol: float = 1e-10
) -> Tuple[DivergenceDuals, float]:
    """Maximize the two-variable (lam, gamma) divergence dual.

    The dual function is jointly concave; gamma is eliminated by a root
    find and the remaining one-dimensional concave profile is bracketed
    on a geometric grid and polished with bounded Brent.
    """
    nom = aset.pi_nom.probs
    kind, eps = aset.kind, aset.epsilon
    xmin = float(np.min(x))

    best_lam, best_phi = None, xmin  # lam -> 0 limit value
    prev = -np.inf
    lams = [2.0**j for j in range(-26, 40)]
    for lam in lams:
        val, _ = _divergence_phi(kind, lam, x, nom, eps)
        if val > best_phi:
            best_phi, best_lam = val, lam
        if val < prev - 1e-12 and best_lam is not None and lam > 4.0 * best_lam:
            break  # concave profile is past its peak
        prev = val

    if best_lam is None:
        # lam = 0 is optimal: the unconstrained bound min(x) is attained
        lam = 0.0
        gamma = -xmin
        z = -x - gamma
        w = np.atleast_1d(perspective(kind, lam, z))
        d = DivergenceDuals(lam=lam, gamma=gamma, w=w, z=z)
        return d, float(-nom @ w - eps * lam - gamma)

    lo, hi = best_lam / 2.0, best_lam * 2.0
    res = minimize_scalar(
        lambda L: -_divergence_phi(kind, L, x, nom, eps)[0],
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": max(1e-14 * hi, 1e-300), "maxiter": 300},
    )
    lam = float(res.x)
    val, gamma = _divergence_phi(kind, lam, x, nom, eps)
    if best_phi > val:
        lam = best_lam
        val, gamma = _divergence_phi(kind, lam, x, nom, eps)
    z = -x - gamma
    w = np.atleast_1d(perspective(kind, lam, z))
    d = DivergenceDuals(lam=lam, gamma=gamma, w=w, z=z)
    return d, val


def maximize_dual_wasserstein(x, aset: WassersteinBall) -> Tuple[WassersteinDuals, float]:
    """Maximize the one-dimensional Wasserstein dual over lam >= 0.

    The profile is piecewise-linear concave, so for moderate K the exact
    maximum sits at one of the pairwise envelope breakpoints; larger K
    falls back to golden-section refinement.
    """
    K = aset.K

    def phi(lam):
        shifted = x[:, None] + lam * aset.cost
        return float(aset.pi_nom.probs @ np.min(shifted, axis=0) - aset.s * lam)

    cands = {0.0}
    if K <= 40:
        for j in range(K):
            cj = aset.cost[:, j]
            for i in range(K):
                for l in range(i + 1, K):
                    dc = cj[l] - cj[i]
                    if dc != 0.0:
                        lam = (x[i] - x[l]) / dc
                        if lam > 0.0 and np.isfinite(lam):
                            cands.add(float(lam))
        best_lam = max(cands, key=phi)
    else:
        lo, hi, best_lam = 0.0, 1.0, 0.0
        while phi(hi) > phi(hi / 2.0) and hi < 1e12:
            hi *= 4.0
        r = minimize_scalar(lambda L: -phi(L), bounds=(lo, hi), method="bounded", options={"xatol": 1e-13 * max(1.0, hi)})
        best_lam = float(r.x)
        if phi(0.0) > phi(best_lam):
            best_lam = 0.0
    d = WassersteinDuals(lam=best_lam)
    return d, _dual_value_wasserstein_x(x, aset, d)
