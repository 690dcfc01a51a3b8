"""Bet optimization: nominal Kelly and its distributionally robust version.

Maximizes the concave worst-case growth b -> G(b) over the polyhedral bet
set by a cutting-plane scheme with exact line searches.  Every oracle
call at an iterate yields a global over-estimator (a cut)

    G(b') <= G(b_t) + g_t'(b' - b_t),

where g_t is the growth gradient at the worst-case distribution, so the
bundle LP maximizer provides both the next probe point and a certified
upper bound; the gap it reports is a true bound on suboptimality, valid
regardless of how ties in the inner minimum are broken.  A final smooth
polish against the last worst-case distribution sharpens the iterate
without affecting the certificate.
"""

import math
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from .ambiguity import AmbiguitySet, Singleton
from .errors import SolverFailure, ValidationError
from .kernels import growth_vector
from .linprog import LinearProgram, LpStatus, solve_lp
from .market import Bet, BettingMarket, Distribution
from .oracle import DEFAULT_ORACLE_TOL, WorstCaseResult, worst_case_from_logpayoffs, worst_value

__all__ = ["SolveReport", "solve_kelly", "solve_drkp", "certify"]

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 10000
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolveReport:
    """Certified solve outcome; `value` is the oracle's growth at b_star."""

    b_star: Bet
    value: float
    gap: float
    iterations: int
    wall_time: float
    oracle_calls: int
    converged: bool
    worst_case: WorstCaseResult
    trace: Optional[List[Tuple[float, float]]] = None


def solve_kelly(
    market: BettingMarket,
    pi: Distribution,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    keep_trace: bool = False,
) -> SolveReport:
    """Maximize nominal mean log growth over the bet set."""
    return solve_drkp(market, Singleton(pi), tol, max_iter, keep_trace)


def solve_drkp(
    market: BettingMarket,
    aset: AmbiguitySet,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    keep_trace: bool = False,
) -> SolveReport:
    """Maximize worst-case log growth over the bet set, to certified gap tol."""
    if aset.K != market.K:
        raise ValidationError("ambiguity set and market disagree on K")
    t0 = time.perf_counter()
    state = _State(market, aset, min(1e-8, 0.1 * tol))
    B = market.bet_constraints

    b = B.interior_point()
    if not np.isfinite(state.value(b)):
        b = _max_min_growth_start(market)
        if not np.isfinite(state.value(b)):
            raise SolverFailure("every starting point has -inf worst-case growth")

    cuts_c: List[float] = []
    cuts_g: List[np.ndarray] = []
    cuts_b: List[np.ndarray] = []

    def add_cut(bv) -> Optional[WorstCaseResult]:
        wc = state.full(bv)
        if not np.isfinite(wc.value):
            return None
        g = state.gradient(bv, wc.pi_star.probs)
        cuts_c.append(wc.value)
        cuts_g.append(g)
        cuts_b.append(bv.copy())
        return wc

    best_b = b.copy()
    best = add_cut(b)
    if best is None:
        raise SolverFailure("starting point lost finiteness")  # pragma: no cover

    trace: List[Tuple[float, float]] = []
    gap = np.inf
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        b_hat, upper = _bundle_argmax(B, cuts_c, cuts_g, cuts_b)
        gap = upper - best.value
        if keep_trace:
            trace.append((best.value, gap))
        if gap <= tol:
            converged = True
            break
        # probe the bundle maximizer
        wc_hat = add_cut(b_hat)
        if wc_hat is not None and wc_hat.value > best.value:
            best, best_b = wc_hat, b_hat.copy()
        if wc_hat is None:
            # -inf at b_hat: cut near the finiteness boundary along the segment
            for frac in (0.9, 0.99, 0.999):
                edge = _finite_edge(state, best_b, b_hat, frac)
                if edge is not None:
                    wc_e = add_cut(edge)
                    if wc_e is not None and wc_e.value > best.value:
                        best, best_b = wc_e, edge.copy()
        # exact line search toward the bundle maximizer
        theta = _golden_line_max(state, best_b, b_hat)
        if theta > 0.0:
            b_ls = best_b + theta * (b_hat - best_b)
            wc_ls = add_cut(b_ls)
            if wc_ls is not None and wc_ls.value > best.value:
                best, best_b = wc_ls, b_ls
        if len(cuts_c) > 900:
            keep = list(range(len(cuts_c) - 600, len(cuts_c)))
            cuts_c[:] = [cuts_c[i] for i in keep]
            cuts_g[:] = [cuts_g[i] for i in keep]
            cuts_b[:] = [cuts_b[i] for i in keep]

    # smooth polish against the final worst-case distribution
    polished = _polish(market, best_b, best.pi_star.probs)
    if polished is not None:
        wc_p = state.full(polished)
        if np.isfinite(wc_p.value) and wc_p.value >= best.value:
            g = state.gradient(polished, wc_p.pi_star.probs)
            cuts_c.append(wc_p.value)
            cuts_g.append(g)
            cuts_b.append(polished.copy())
            best, best_b = wc_p, polished
            _, upper = _bundle_argmax(B, cuts_c, cuts_g, cuts_b)
            gap = upper - best.value

    single_gap = _linearization_gap(state, B, best_b, best)
    gap = max(0.0, min(gap, single_gap)) + max(best.gap, 0.0)
    converged = converged or gap <= tol
    return SolveReport(
        b_star=Bet(best_b),
        value=best.value,
        gap=gap,
        iterations=it,
        wall_time=time.perf_counter() - t0,
        oracle_calls=state.calls,
        converged=converged,
        worst_case=best,
        trace=trace if keep_trace else None,
    )


def certify(
    market: BettingMarket, aset: AmbiguitySet, b: Bet, tol: float = DEFAULT_TOL
) -> Tuple[float, float]:
    """Re-certify an externally supplied bet: worst-case value and gap.

    The gap is the one-LP linearization bound max_{b' in B} g'(b' - b),
    valid since any worst-case distribution's growth gradient is a
    supergradient of the concave worst-case growth.
    """
    state = _State(market, aset, min(1e-8, 0.1 * tol))
    wc = state.full(b.alloc)
    if not np.isfinite(wc.value):
        return -np.inf, np.inf
    gap = _linearization_gap(state, market.bet_constraints, b.alloc, wc)
    return wc.value, max(gap, 0.0) + max(wc.gap, 0.0)


class _State:
    """Oracle access with call counting over raw allocation vectors."""

    def __init__(self, market: BettingMarket, aset: AmbiguitySet, otol: float):
        self.market = market
        self.aset = aset
        self.otol = otol
        self.calls = 0

    def logpayoffs(self, b: np.ndarray) -> np.ndarray:
        return growth_vector(self.market.R.T @ b)

    def value(self, b: np.ndarray) -> float:
        self.calls += 1
        return worst_value(self.logpayoffs(b), self.aset, self.otol)

    def full(self, b: np.ndarray) -> WorstCaseResult:
        self.calls += 1
        return worst_case_from_logpayoffs(self.logpayoffs(b), self.aset, self.otol)

    def gradient(self, b: np.ndarray, pi: np.ndarray) -> np.ndarray:
        y = self.market.R.T @ b
        active = pi > 0.0
        w = np.zeros(self.market.K)
        w[active] = pi[active] / y[active]
        return self.market.R @ w


def _bundle_argmax(B, cuts_c, cuts_g, cuts_b) -> Tuple[np.ndarray, float]:
    """Maximize the bundle upper model over the bet set (one LP)."""
    n = B.n
    T = len(cuts_c)
    G = np.vstack(cuts_g)
    rhs = np.array([cuts_c[t] - cuts_g[t] @ cuts_b[t] for t in range(T)])
    # variables (b, m): each cut reads m - g_t'b <= c_t - g_t'b_t
    a_ub = np.hstack([-G, np.ones((T, 1))])
    b_ub = rhs
    if B.linear_ineq is not None:
        F, g = B.linear_ineq
        a_ub = np.vstack([a_ub, np.hstack([F, np.zeros((F.shape[0], 1))])])
        b_ub = np.concatenate([b_ub, g])
    lp = LinearProgram(
        c=np.concatenate([np.zeros(n), [-1.0]]),
        a_ub=a_ub,
        b_ub=b_ub,
        a_eq=np.concatenate([np.ones(n), [0.0]])[None, :],
        b_eq=np.array([1.0]),
        lb=np.concatenate([B.lower, [-np.inf]]),
        ub=np.concatenate([B.upper, [np.inf]]),
    )
    sol = solve_lp(lp)
    if sol.status != LpStatus.OPTIMAL:
        raise SolverFailure(f"bundle LP failed: {sol.status.value}")
    return sol.x[:n], float(sol.x[n])


def _linearization_gap(state: _State, B, b: np.ndarray, wc: WorstCaseResult) -> float:
    g = state.gradient(b, wc.pi_star.probs)
    _, m = B.argmax_linear(g)
    return float(m - g @ b)


def _golden_line_max(state: _State, b0: np.ndarray, b1: np.ndarray, tol: float = 1e-10) -> float:
    """Golden-section maximization of growth along [b0, b1]; returns theta."""
    d = b1 - b0

    def f(theta: float) -> float:
        return state.value(b0 + theta * d)

    hi = 1.0
    f_hi = f(hi)
    shrink = 0
    while not np.isfinite(f_hi) and shrink < 60:
        hi *= 0.5
        f_hi = f(hi)
        shrink += 1
    if not np.isfinite(f_hi):
        return 0.0
    a, bb = 0.0, hi
    c = bb - _GOLDEN * (bb - a)
    dd = a + _GOLDEN * (bb - a)
    fc, fd = f(c), f(dd)
    best_th, best_f = (hi, f_hi)
    f0 = f(0.0)
    if f0 > best_f:
        best_th, best_f = 0.0, f0
    while bb - a > tol:
        if fc >= fd:
            bb, dd, fd = dd, c, fc
            c = bb - _GOLDEN * (bb - a)
            fc = f(c)
        else:
            a, c, fc = c, dd, fd
            dd = a + _GOLDEN * (bb - a)
            fd = f(dd)
        if fc > best_f:
            best_th, best_f = c, fc
        if fd > best_f:
            best_th, best_f = dd, fd
    return best_th


def _finite_edge(state: _State, b0: np.ndarray, b1: np.ndarray, frac: float) -> Optional[np.ndarray]:
    """A point close to where growth leaves the finite region on [b0, b1]."""
    lo, hi = 0.0, 1.0
    if np.isfinite(state.value(b1)):
        return b1
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if np.isfinite(state.value(b0 + mid * (b1 - b0))):
            lo = mid
        else:
            hi = mid
    theta = frac * lo
    if theta <= 0.0:
        return None
    return b0 + theta * (b1 - b0)


def _max_min_growth_start(market: BettingMarket) -> np.ndarray:
    """Fallback start: maximize the minimum payoff across outcomes."""
    B = market.bet_constraints
    n, K = market.n, market.K
    a_ub = np.hstack([-market.R.T, np.ones((K, 1))])
    b_ub = np.zeros(K)
    if B.linear_ineq is not None:
        F, g = B.linear_ineq
        a_ub = np.vstack([a_ub, np.hstack([F, np.zeros((F.shape[0], 1))])])
        b_ub = np.concatenate([b_ub, g])
    lp = LinearProgram(
        c=np.concatenate([np.zeros(n), [-1.0]]),
        a_ub=a_ub,
        b_ub=b_ub,
        a_eq=np.concatenate([np.ones(n), [0.0]])[None, :],
        b_eq=np.array([1.0]),
        lb=np.concatenate([B.lower, [0.0]]),
        ub=np.concatenate([B.upper, [np.inf]]),
    )
    sol = solve_lp(lp)
    if sol.status != LpStatus.OPTIMAL:
        raise SolverFailure("max-min growth LP failed")
    return sol.x[:n]


def _polish(market: BettingMarket, b0: np.ndarray, pi: np.ndarray) -> Optional[np.ndarray]:
    """Maximize growth under the fixed distribution pi from b0 (smooth)."""
    B = market.bet_constraints
    R = market.R
    active = pi > 0.0
    Ra = R[:, active]
    pa = pi[active]

    def negobj(b):
        y = Ra.T @ b
        if np.any(y <= 0.0):
            return 1e30, np.zeros_like(b)
        return -float(pa @ np.log(y)), -Ra @ (pa / y)

    cons = [{"type": "eq", "fun": lambda v: v.sum() - 1.0, "jac": lambda v: np.ones(v.size)}]
    if B.linear_ineq is not None:
        F, g = B.linear_ineq
        cons.append({"type": "ineq", "fun": lambda v: g - F @ v, "jac": lambda v: -F})
    res = minimize(
        negobj,
        b0,
        jac=True,
        method="SLSQP",
        bounds=list(zip(B.lower, B.upper)),
        constraints=cons,
        options={"maxiter": 200, "ftol": 1e-16},
    )
    if not np.all(np.isfinite(res.x)):
        return None
    b = np.clip(res.x, B.lower, B.upper)
    s = b.sum()
    if s <= 0.0:
        return None
    b = b / s
    if not B.contains(Bet(b), tol=1e-9):
        return None
    return b
