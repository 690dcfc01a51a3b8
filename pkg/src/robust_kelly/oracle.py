"""Exact inner worst-case oracles: G(b) = inf over the ambiguity set.

Given a fixed bet, each family gets a primal method that produces a
feasible worst-case distribution (the witness), its growth value, and a
dual certificate whose value matches within the requested tolerance.
Feasible-witness value >= true inf >= dual value, so a small gap proves
both sides.

Zero-payoff outcomes make the growth -inf wherever the family permits
mass on them; that is a domain boundary, reported as a value, not an
error.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize

from . import duals as _duals
from .ambiguity import (
    AmbiguitySet,
    Box,
    ConvexHull,
    DivergenceBall,
    NormBall,
    Polyhedral,
    Singleton,
    WassersteinBall,
)
from .divergences import conjugate_prime
from .errors import SolverFailure, ValidationError
from .kernels import ball_worst, box_fill
from .linprog import LinearProgram, LpStatus, solve_lp
from .market import Bet, BettingMarket, Distribution

__all__ = ["WorstCaseResult", "worst_case", "worst_case_from_logpayoffs", "worst_value"]

DEFAULT_ORACLE_TOL = 1e-7


@dataclass(frozen=True)
class WorstCaseResult:
    """Worst-case distribution, its growth, and the dual certificate."""

    pi_star: Distribution
    value: float
    certificate: Optional[object]
    dual_value: float
    gap: float

    @property
    def is_finite(self) -> bool:
        return np.isfinite(self.value)


def _aware_dot(p: np.ndarray, x: np.ndarray) -> float:
    """p'x treating 0 * (-inf) as 0."""
    mask = p > 0.0
    if np.any(np.isneginf(x[mask])):
        return -np.inf
    return float(p[mask] @ x[mask])


def _neg_inf_result(witness: np.ndarray) -> WorstCaseResult:
    return WorstCaseResult(
        pi_star=Distribution(witness),
        value=-np.inf,
        certificate=None,
        dual_value=-np.inf,
        gap=0.0,
    )


def worst_case(
    market: BettingMarket, b: Bet, aset: AmbiguitySet, tol: float = DEFAULT_ORACLE_TOL
) -> WorstCaseResult:
    """Dispatch the exact worst-case computation for any family."""
    if aset.K != market.K:
        raise ValidationError(f"ambiguity set lives in K={aset.K}, market has {market.K} outcomes")
    return worst_case_from_logpayoffs(market.log_payoffs(b), aset, tol)


def worst_case_from_logpayoffs(x: np.ndarray, aset: AmbiguitySet, tol: float = DEFAULT_ORACLE_TOL) -> WorstCaseResult:
    x = np.asarray(x, dtype=np.float64)
    if isinstance(aset, Singleton):
        return _singleton_worst(x, aset)
    if isinstance(aset, ConvexHull):
        return _hull_worst(x, aset)
    if isinstance(aset, Box):
        return _box_worst(x, aset)
    if isinstance(aset, Polyhedral):
        return _polyhedral_worst(x, aset, tol)
    if isinstance(aset, NormBall):
        return _normball_worst(x, aset, tol)
    if isinstance(aset, DivergenceBall):
        return _divergence_worst(x, aset, tol)
    if isinstance(aset, WassersteinBall):
        return _wasserstein_worst(x, aset, tol)
    raise ValidationError(f"unknown ambiguity set type {type(aset).__name__}")


def worst_value(x: np.ndarray, aset: AmbiguitySet, tol: float = DEFAULT_ORACLE_TOL) -> float:
    """Light evaluation of the worst-case growth (for line searches)."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(aset, Singleton):
        return _aware_dot(aset.pi_nom.probs, x)
    if isinstance(aset, ConvexHull):
        return min(_aware_dot(v, x) for v in aset.V)
    if isinstance(aset, Box):
        pi, _ = box_fill(x, aset.lo, aset.hi)
        return _aware_dot(pi, x)
    if isinstance(aset, NormBall):
        c = _scaled_identity(aset)
        if c is not None and aset.p == 2.0:
            if np.any(np.isneginf(x)):
                return -np.inf
            pi, _, _ = ball_worst(x, aset.pi_nom.probs, c)
            return float(pi @ x)
    return worst_case_from_logpayoffs(x, aset, tol).value


# ---------------------------------------------------------------------------
# singleton / hull
# ---------------------------------------------------------------------------


def _singleton_worst(x, aset: Singleton) -> WorstCaseResult:
    value = _aware_dot(aset.pi_nom.probs, x)
    return WorstCaseResult(
        pi_star=aset.pi_nom, value=value, certificate=None, dual_value=value, gap=0.0
    )


def _hull_worst(x, aset: ConvexHull) -> WorstCaseResult:
    vals = np.array([_aware_dot(v, x) for v in aset.V])
    k = int(np.argmin(vals))
    return WorstCaseResult(
        pi_star=aset.vertices[k],
        value=float(vals[k]),
        certificate={"vertex": k, "vertex_values": vals},
        dual_value=float(vals[k]),
        gap=0.0,
    )


# ---------------------------------------------------------------------------
# box
# ---------------------------------------------------------------------------


def _box_worst(x, aset: Box) -> WorstCaseResult:
    lo, hi = aset.lo, aset.hi
    pi, gamma = box_fill(x, lo, hi)
    value = _aware_dot(pi, x)
    if not np.isfinite(value):
        return _neg_inf_result(pi)
    nom, rho = aset.pi_nom.probs, aset.rho
    finite = np.isfinite(x)
    lam = np.zeros(aset.K)
    pos = finite & (pi > 0.0)
    lam[pos] = gamma - x[pos]
    zero = finite & (pi <= 0.0)
    lam[zero] = np.maximum(gamma - x[zero], 0.0)
    # coordinates with x = -inf can only be pinned (hi = 0 there); the dual
    # certificate is evaluated on the outcome support
    dual_value = float(np.min((x + lam)[finite]) - nom @ lam - rho @ np.abs(lam))
    cert = _duals.BoxDuals(lam=lam)
    return WorstCaseResult(
        pi_star=Distribution(pi),
        value=value,
        certificate=cert,
        dual_value=dual_value,
        gap=value - dual_value,
    )


# ---------------------------------------------------------------------------
# polyhedral
# ---------------------------------------------------------------------------


def _polyhedral_worst(x, aset: Polyhedral, tol: float) -> WorstCaseResult:
    K = aset.K
    dead = np.isneginf(x)
    ub = np.ones(K)
    if np.any(dead):
        # can the set place mass on a zero-payoff outcome?
        lp = LinearProgram(
            c=-dead.astype(np.float64),
            a_ub=aset.A1,
            b_ub=aset.d1,
            a_eq=np.vstack([np.ones((1, K))] + ([aset.A0] if aset.A0 is not None else [])),
            b_eq=np.concatenate([[1.0]] + ([aset.d0] if aset.d0 is not None else [])),
        )
        sol = solve_lp(lp, tol)
        if sol.status != LpStatus.OPTIMAL:
            raise SolverFailure(f"polyhedral mass probe failed: {sol.status.value}")
        if -sol.value > 1e-11:
            return _neg_inf_result(sol.x)
        ub = np.where(dead, 0.0, 1.0)
    c = np.where(dead, 0.0, x)
    lp = LinearProgram(
        c=c,
        a_ub=aset.A1,
        b_ub=aset.d1,
        a_eq=np.vstack([np.ones((1, K))] + ([aset.A0] if aset.A0 is not None else [])),
        b_eq=np.concatenate([[1.0]] + ([aset.d0] if aset.d0 is not None else [])),
        ub=ub,
    )
    sol = solve_lp(lp, tol)
    if sol.status != LpStatus.OPTIMAL:
        raise SolverFailure(f"polyhedral worst-case LP failed: {sol.status.value}")
    pi = np.maximum(sol.x, 0.0)
    pi /= pi.sum()
    value = _aware_dot(pi, x)
    n_eq0 = 0 if aset.A0 is None else aset.A0.shape[0]
    nu = sol.y_eq[1 : 1 + n_eq0] if n_eq0 else np.zeros(0)
    lam = np.maximum(sol.y_ub, 0.0) if aset.A1 is not None else np.zeros(0)
    cert = _duals.PolyhedralDuals(nu=nu, lam=lam)
    shifted = c.copy()
    if aset.A0 is not None:
        shifted = shifted + aset.A0.T @ nu
    if aset.A1 is not None:
        shifted = shifted + aset.A1.T @ lam
    dual_value = float(np.min(shifted[~dead]))
    if aset.A0 is not None:
        dual_value -= float(aset.d0 @ nu)
    if aset.A1 is not None:
        dual_value -= float(aset.d1 @ lam)
    return WorstCaseResult(
        pi_star=Distribution(pi),
        value=value,
        certificate=cert,
        dual_value=dual_value,
        gap=value - dual_value,
    )


# ---------------------------------------------------------------------------
# norm ball
# ---------------------------------------------------------------------------


def _scaled_identity(aset: NormBall) -> Optional[float]:
    c = aset.W[0, 0]
    if c > 0.0 and np.array_equal(aset.W, c * np.eye(aset.K)):
        return float(c)
    return None


def _normball_neg_inf(x, aset: NormBall) -> WorstCaseResult:
    k = int(np.argmax(np.isneginf(x)))
    nom = aset.pi_nom.probs
    j = int(np.argmax(np.where(np.arange(aset.K) == k, -1.0, nom)))
    step = np.zeros(aset.K)
    step[k] += 1.0
    step[j] -= 1.0
    denom = float(np.linalg.norm(aset.W_inv @ step, ord=(np.inf if np.isinf(aset.p) else aset.p)))
    delta = 0.5 * min(1.0 / max(denom, 1e-300), nom[j])
    return _neg_inf_result(nom + delta * step)


def _normball_worst(x, aset: NormBall, tol: float) -> WorstCaseResult:
    if np.any(np.isneginf(x)):
        return _normball_neg_inf(x, aset)
    c = _scaled_identity(aset)
    if c is not None and aset.p == 2.0:
        return _ball_fast_worst(x, aset, c, tol)
    if aset.p == 1.0 or np.isinf(aset.p):
        return _normball_lp_worst(x, aset, tol)
    return _normball_smooth_worst(x, aset, tol)


def _finish_normball(x, aset: NormBall, pi, gamma, t, eta, tol) -> WorstCaseResult:
    """Build the certificate u = x - m, mu = -gamma from KKT data."""
    pi = _polish_ball_witness(aset, pi)
    value = float(pi @ x)
    u = np.minimum(-gamma - t * (aset.W_inv.T @ eta), x)
    d = _duals.NormBallDuals(u=u, mu=-gamma)
    dual_value = _duals._dual_value_normball_x(x, aset, d)
    gap = value - dual_value
    if not np.isfinite(gap) or gap > tol:
        d2, dv2 = _duals.maximize_dual_normball(x, aset, starts=[d])
        if dv2 > dual_value:
            d, dual_value = d2, dv2
            gap = value - dual_value
    return WorstCaseResult(
        pi_star=Distribution(pi), value=value, certificate=d, dual_value=dual_value, gap=gap
    )


def _polish_ball_witness(aset: NormBall, pi: np.ndarray) -> np.ndarray:
    pi = np.maximum(pi, 0.0)
    pi = pi / pi.sum()
    r = aset.radius(pi)
    if r > 1.0:
        shrink = (1.0 - 1e-12) / r
        pi = aset.pi_nom.probs + shrink * (pi - aset.pi_nom.probs)
        pi = np.maximum(pi, 0.0)
        pi = pi / pi.sum()
    return pi


def _ball_fast_worst(x, aset: NormBall, c: float, tol: float) -> WorstCaseResult:
    nom = aset.pi_nom.probs
    pi, t_pen, gamma = ball_worst(x, nom, c)
    delta = pi - nom
    dist = float(np.linalg.norm(delta))
    if t_pen == 0.0 or dist <= 1e-300:
        eta = np.zeros(aset.K)
        t = 0.0
    else:
        eta = delta / dist
        t = 2.0 * t_pen * c * dist
    return _finish_normball(x, aset, pi, gamma, t, eta, tol)


def _normball_lp_worst(x, aset: NormBall, tol: float) -> WorstCaseResult:
    K = aset.K
    Wi = aset.W_inv
    nom = aset.pi_nom.probs
    if np.isinf(aset.p):
        a_ub = np.vstack([Wi, -Wi])
        b_ub = np.concatenate([Wi @ nom + 1.0, 1.0 - Wi @ nom])
        lp = LinearProgram(
            c=x,
            a_ub=a_ub,
            b_ub=b_ub,
            a_eq=np.ones((1, K)),
            b_eq=np.array([1.0]),
        )
        sol = solve_lp(lp, tol)
        if sol.status != LpStatus.OPTIMAL:
            raise SolverFailure(f"norm-ball LP failed: {sol.status.value}")
        pi = sol.x
    else:  # p = 1 via transport-style splitting z = s+ - s-
        a_eq = np.zeros((K + 1, 3 * K))
        a_eq[:K, :K] = Wi
        a_eq[:K, K : 2 * K] = -np.eye(K)
        a_eq[:K, 2 * K :] = np.eye(K)
        a_eq[K, :K] = 1.0
        b_eq = np.concatenate([Wi @ nom, [1.0]])
        a_ub = np.concatenate([np.zeros(K), np.ones(2 * K)])[None, :]
        lp = LinearProgram(
            c=np.concatenate([x, np.zeros(2 * K)]),
            a_ub=a_ub,
            b_ub=np.array([1.0]),
            a_eq=a_eq,
            b_eq=b_eq,
        )
        sol = solve_lp(lp, tol)
        if sol.status != LpStatus.OPTIMAL:
            raise SolverFailure(f"norm-ball LP failed: {sol.status.value}")
        pi = sol.x[:K]
    pi = _polish_ball_witness(aset, pi)
    value = float(pi @ x)
    d, dual_value = _duals.maximize_dual_normball(x, aset, tol)
    return WorstCaseResult(
        pi_star=Distribution(pi),
        value=value,
        certificate=d,
        dual_value=dual_value,
        gap=value - dual_value,
    )


def _norm_grad_and_hess(z, p):
    """eta = grad ||z||_p and H = d eta / dz, away from z = 0."""
    N = float(np.linalg.norm(z, ord=p))
    absz = np.abs(z)
    a = np.sign(z) * absz ** (p - 1.0)
    eta = a / N ** (p - 1.0)
    if p < 2.0:
        diag = np.minimum(absz ** (p - 2.0), 1e14)
    else:
        diag = absz ** (p - 2.0)
    H = (p - 1.0) * (np.diag(diag) / N ** (p - 1.0) - np.outer(a, a) / N ** (2.0 * p - 1.0))
    return eta, H, N


def _normball_smooth_worst(x, aset: NormBall, tol: float) -> WorstCaseResult:
    K = aset.K
    nom = aset.pi_nom.probs
    Wi = aset.W_inv
    p = aset.p
    xmin = float(np.min(x))

    # vertex shortcut: the unconstrained simplex minimizer may be feasible
    for k in np.flatnonzero(x <= xmin + 1e-15):
        e = np.zeros(K)
        e[k] = 1.0
        if aset.radius(e) <= 1.0 + 1e-12:
            d = _duals.NormBallDuals(u=np.full(K, xmin), mu=xmin)
            return WorstCaseResult(
                pi_star=Distribution(e),
                value=float(x[k]),
                certificate=d,
                dual_value=_duals._dual_value_normball_x(x, aset, d),
                gap=0.0,
            )

    def radius_and_grad(pi):
        z = Wi @ (pi - nom)
        N = float(np.linalg.norm(z, ord=p))
        if N <= 1e-14:
            return N, np.zeros(K)
        g = np.sign(z) * (np.abs(z) / N) ** (p - 1.0)
        return N, Wi.T @ g

    res = minimize(
        lambda v: (float(x @ v), x),
        nom,
        jac=True,
        method="SLSQP",
        bounds=[(0.0, 1.0)] * K,
        constraints=[
            {"type": "eq", "fun": lambda v: v.sum() - 1.0, "jac": lambda v: np.ones(K)},
            {
                "type": "ineq",
                "fun": lambda v: 1.0 - radius_and_grad(v)[0],
                "jac": lambda v: -radius_and_grad(v)[1],
            },
        ],
        options={"maxiter": 400, "ftol": 1e-14},
    )
    pi_hat = np.maximum(res.x, 0.0)
    pi_hat /= pi_hat.sum()

    if aset.radius(pi_hat) < 1.0 - 1e-7:
        # ball slack: the optimum sits on the min-x face (tied coordinates)
        pi = _polish_ball_witness(aset, pi_hat)
        d = _duals.NormBallDuals(u=np.full(K, xmin), mu=xmin)
        dual_value = _duals._dual_value_normball_x(x, aset, d)
        value = float(pi @ x)
        return WorstCaseResult(
            pi_star=Distribution(pi),
            value=value,
            certificate=d,
            dual_value=dual_value,
            gap=value - dual_value,
        )

    pi, gamma, t, eta, ok = _normball_active_set(x, aset, pi_hat, tol)
    if not ok:
        # honest fallback: certify the SLSQP point as well as possible
        pi = pi_hat
        z = Wi @ (pi - nom)
        eta, _, N = _norm_grad_and_hess(z, p)
        F = pi > 1e-9
        A = np.column_stack([np.ones(F.sum()), (Wi.T @ eta)[F]])
        sol, *_ = np.linalg.lstsq(A, -x[F], rcond=None)
        gamma, t = float(sol[0]), max(float(sol[1]), 0.0)
    return _finish_normball(x, aset, pi, gamma, t, eta, tol)


def _normball_active_set(x, aset: NormBall, pi0, tol):
    """Newton refinement of the KKT system on a guessed support."""
    K = aset.K
    nom = aset.pi_nom.probs
    Wi = aset.W_inv
    p = aset.p
    act_tol = 1e-8
    free = pi0 > act_tol
    pi, gamma, t, eta = pi0.copy(), 0.0, 1.0, np.zeros(K)
    for _round in range(2 * K + 8):
        out = _newton_kkt(x, nom, Wi, p, free, pi)
        if out is None:
            return pi, gamma, t, eta, False
        pi, gamma, t, eta = out
        if t < -1e-9:
            return pi, gamma, t, eta, False
        t = max(t, 0.0)
        viol_pi = pi < -1e-11
        if np.any(viol_pi & free):
            k = int(np.argmin(np.where(free, pi, np.inf)))
            free[k] = False
            pi = np.maximum(pi, 0.0)
            s = pi.sum()
            if s > 0:
                pi = pi / s
            continue
        m = x + gamma + t * (Wi.T @ eta)
        bad = (~free) & (m < -1e-8)
        if np.any(bad):
            k = int(np.argmin(np.where(bad, m, np.inf)))
            free[k] = True
            continue
        return np.maximum(pi, 0.0), gamma, t, eta, True
    return pi, gamma, t, eta, False


def _newton_kkt(x, nom, Wi, p, free, pi_start):
    K = x.size
    F = np.flatnonzero(free)
    f = F.size
    if f == 0:
        return None
    pi = np.where(free, np.maximum(pi_start, 0.0), 0.0)
    s = pi[F].sum()
    pi[F] = pi[F] / s if s > 0 else 1.0 / f
    # initial multipliers from least squares on the stationarity rows
    z = Wi @ (pi - nom)
    if np.linalg.norm(z, ord=p) <= 1e-14:
        return None
    eta, _, _ = _norm_grad_and_hess(z, p)
    A = np.column_stack([np.ones(f), (Wi.T @ eta)[F]])
    sol, *_ = np.linalg.lstsq(A, -x[F], rcond=None)
    gamma, t = float(sol[0]), max(float(sol[1]), 1e-10)
    w = np.concatenate([pi[F], [gamma, t]])

    def residual(w):
        piv = np.zeros(K)
        piv[F] = w[:f]
        z = Wi @ (piv - nom)
        N = np.linalg.norm(z, ord=p)
        if N <= 1e-14:
            return None
        eta, H, N = _norm_grad_and_hess(z, p)
        r = np.concatenate(
            [x[F] + w[f] + w[f + 1] * (Wi.T @ eta)[F], [w[:f].sum() - 1.0], [N - 1.0]]
        )
        return r, eta, H

    out = residual(w)
    if out is None:
        return None
    r, eta, H = out
    rn = float(np.linalg.norm(r))
    for _ in range(100):
        if rn < 1e-12:
            break
        M = Wi.T @ H @ Wi
        wie = Wi.T @ eta
        J = np.zeros((f + 2, f + 2))
        J[:f, :f] = w[f + 1] * M[np.ix_(F, F)]
        J[:f, f] = 1.0
        J[:f, f + 1] = wie[F]
        J[f, :f] = 1.0
        J[f + 1, :f] = wie[F]
        try:
            step = np.linalg.solve(J + 1e-14 * np.eye(f + 2), -r)
        except np.linalg.LinAlgError:
            return None
        stepn = 1.0
        improved = False
        for _bt in range(40):
            w_new = w + stepn * step
            out = residual(w_new)
            if out is not None:
                r_new, eta_new, H_new = out
                rn_new = float(np.linalg.norm(r_new))
                if rn_new < rn * (1.0 - 1e-4 * stepn) or rn_new < 1e-12:
                    w, r, eta, H, rn = w_new, r_new, eta_new, H_new, rn_new
                    improved = True
                    break
            stepn *= 0.5
        if not improved:
            break
    if rn > 1e-9:
        return None
    pi = np.zeros(K)
    pi[F] = w[:f]
    return pi, float(w[f]), float(w[f + 1]), eta


# ---------------------------------------------------------------------------
# divergence ball
# ---------------------------------------------------------------------------


def _divergence_worst(x, aset: DivergenceBall, tol: float) -> WorstCaseResult:
    if np.any(np.isneginf(x)):
        # pi_nom is strictly positive, so it already puts mass on every
        # zero-payoff outcome and certifies the -inf value itself
        return _neg_inf_result(aset.pi_nom.probs)
    if aset.kind.name == "total_variation":
        return _divergence_tv_worst(x, aset, tol)
    return _divergence_smooth_worst(x, aset, tol)


def _divergence_tv_worst(x, aset: DivergenceBall, tol: float) -> WorstCaseResult:
    K = aset.K
    nom = aset.pi_nom.probs
    # variables (pi, v): v >= |pi - nom|, sum v <= eps
    a_ub = np.vstack(
        [
            np.hstack([np.eye(K), -np.eye(K)]),
            np.hstack([-np.eye(K), -np.eye(K)]),
            np.concatenate([np.zeros(K), np.ones(K)])[None, :],
        ]
    )
    b_ub = np.concatenate([nom, -nom, [aset.epsilon]])
    lp = LinearProgram(
        c=np.concatenate([x, np.zeros(K)]),
        a_ub=a_ub,
        b_ub=b_ub,
        a_eq=np.concatenate([np.ones(K), np.zeros(K)])[None, :],
        b_eq=np.array([1.0]),
    )
    sol = solve_lp(lp, tol)
    if sol.status != LpStatus.OPTIMAL:
        raise SolverFailure(f"total-variation LP failed: {sol.status.value}")
    pi = np.maximum(sol.x[:K], 0.0)
    pi /= pi.sum()
    value = float(pi @ x)
    lam = float(max(sol.y_ub[-1], 0.0))
    # exact gamma for this lam: piecewise-linear concave in gamma
    gamma_min = -float(np.min(x)) - lam
    cands = np.concatenate([[gamma_min], (lam - x)[lam - x >= gamma_min - 1e-15]])

    def dval(gamma):
        w = np.maximum(-x - gamma, -lam)
        return float(-nom @ w - aset.epsilon * lam - gamma)

    gamma = float(max(cands, key=dval))
    z = -x - gamma
    w = np.maximum(z, -lam)
    d = _duals.DivergenceDuals(lam=lam, gamma=gamma, w=w, z=z)
    dual_value = dval(gamma)
    return WorstCaseResult(
        pi_star=Distribution(pi),
        value=value,
        certificate=d,
        dual_value=dual_value,
        gap=value - dual_value,
    )


def _divergence_smooth_worst(x, aset: DivergenceBall, tol: float) -> WorstCaseResult:
    nom = aset.pi_nom.probs
    d, dual_value = _duals.maximize_dual_divergence(x, aset)
    if d.lam <= 1e-13:
        pi = _divergence_minface_witness(x, aset)
    else:
        ratios = np.atleast_1d(conjugate_prime(aset.kind, d.z / d.lam))
        ratios = np.where(np.isfinite(ratios), ratios, 0.0)
        pi = nom * ratios
        s = pi.sum()
        if s <= 0.0:
            pi = nom.copy()
        else:
            pi = pi / s
        pi = _divergence_feasible(pi, aset)
    value = float(pi @ x)
    return WorstCaseResult(
        pi_star=Distribution(pi),
        value=value,
        certificate=d,
        dual_value=dual_value,
        gap=value - dual_value,
    )


def _divergence_feasible(pi, aset: DivergenceBall) -> np.ndarray:
    """Shrink toward pi_nom until inside the ball (convex along the segment)."""
    nom = aset.pi_nom.probs
    if aset.divergence(pi) <= aset.epsilon:
        return pi
    lo_th, hi_th = 0.0, 1.0
    for _ in range(100):
        mid = 0.5 * (lo_th + hi_th)
        cand = nom + mid * (pi - nom)
        if aset.divergence(cand) <= aset.epsilon:
            lo_th = mid
        else:
            hi_th = mid
    return nom + lo_th * (pi - nom)


def _divergence_minface_witness(x, aset: DivergenceBall) -> np.ndarray:
    """Feasible point concentrated on the min-x face when lam* = 0."""
    nom = aset.pi_nom.probs
    xmin = float(np.min(x))
    face = x <= xmin + 1e-12
    cond = np.where(face, nom, 0.0)
    cond = cond / cond.sum()
    if aset.divergence(cond) <= aset.epsilon:
        return cond
    return _divergence_feasible(cond, aset)


# ---------------------------------------------------------------------------
# wasserstein ball
# ---------------------------------------------------------------------------


def _wasserstein_neg_inf(x, aset: WassersteinBall) -> WorstCaseResult:
    k = int(np.argmax(np.isneginf(x)))
    nom = aset.pi_nom.probs
    j = int(np.argmax(np.where(np.arange(aset.K) == k, -1.0, nom)))
    move_cost = float(aset.cost[k, j])
    delta = 0.5 * nom[j]
    if move_cost > 0.0:
        delta = min(delta, 0.5 * aset.s / move_cost)
    w = nom.copy()
    w[j] -= delta
    w[k] += delta
    return _neg_inf_result(w)


def _wasserstein_worst(x, aset: WassersteinBall, tol: float) -> WorstCaseResult:
    if np.any(np.isneginf(x)):
        return _wasserstein_neg_inf(x, aset)
    K = aset.K
    nom = aset.pi_nom.probs
    # transport plan Q (row i = destination outcome, col j = nominal source)
    col_sums = sp.kron(np.ones((1, K)), sp.eye(K), format="csr")
    lp = LinearProgram(
        c=np.repeat(x, K),
        a_ub=sp.csr_matrix(aset.cost.ravel()[None, :]),
        b_ub=np.array([aset.s]),
        a_eq=col_sums,
        b_eq=nom,
    )
    sol = solve_lp(lp, tol)
    if sol.status != LpStatus.OPTIMAL:
        raise SolverFailure(f"transport worst-case LP failed: {sol.status.value}")
    Q = np.maximum(sol.x.reshape(K, K), 0.0)
    pi = Q.sum(axis=1)
    pi /= pi.sum()
    value = float(pi @ x)
    lam = float(max(sol.y_ub[0], 0.0))
    d = _duals.WassersteinDuals(lam=lam)
    dual_value = _duals._dual_value_wasserstein_x(x, aset, d)
    return WorstCaseResult(
        pi_star=Distribution(pi),
        value=value,
        certificate=d,
        dual_value=dual_value,
        gap=value - dual_value,
    )
