"""Thin linear-programming kernel used throughout the package.

Wraps scipy's HiGHS interface behind a fixed primal/dual contract:
for the problem

    minimize    c'v
    subject to  A_ub v <= b_ub    (dual y_ub >= 0)
                A_eq v == b_eq    (dual y_eq, free)
                lb <= v <= ub

duals are reported with the Lagrangian convention

    L(v, y) = c'v + y_ub'(A_ub v - b_ub) + y_eq'(A_eq v - b_eq),

so on an optimal solution the dual objective

    g(y) = inf_{lb<=v<=ub} (c + A_ub'y_ub + A_eq'y_eq)'v - b_ub'y_ub - b_eq'y_eq

equals the primal value.  Solutions are verified (feasibility and the
primal/dual match) before being reported as optimal; anything that fails
verification comes back as FAILED rather than as a wrong answer.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog as _scipy_linprog

from .errors import DimensionError

__all__ = ["LinearProgram", "LpStatus", "LpSolution", "solve_lp"]


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    FAILED = "failed"


@dataclass(frozen=True)
class LinearProgram:
    """Dense/sparse LP data in the module's canonical minimize form."""

    c: np.ndarray
    a_ub: Optional[object] = None
    b_ub: Optional[np.ndarray] = None
    a_eq: Optional[object] = None
    b_eq: Optional[np.ndarray] = None
    lb: Optional[np.ndarray] = None  # default 0
    ub: Optional[np.ndarray] = None  # default +inf

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=np.float64))
        object.__setattr__(self, "c", c)
        n = c.size
        for name, mat, rhs in (("a_ub", self.a_ub, self.b_ub), ("a_eq", self.a_eq, self.b_eq)):
            if mat is None:
                if rhs is not None:
                    raise DimensionError(f"{name} missing but its rhs was given")
                continue
            if not sp.issparse(mat):
                mat = np.atleast_2d(np.asarray(mat, dtype=np.float64))
                object.__setattr__(self, name, mat)
            rhs = np.atleast_1d(np.asarray(rhs, dtype=np.float64))
            object.__setattr__(self, "b" + name[1:], rhs)
            if mat.shape[1] != n or mat.shape[0] != rhs.size:
                raise DimensionError(f"{name} shape {mat.shape} incompatible with c ({n}) / rhs ({rhs.size})")
        for name, default in (("lb", 0.0), ("ub", np.inf)):
            v = getattr(self, name)
            if v is None:
                v = np.full(n, default)
            else:
                v = np.broadcast_to(np.asarray(v, dtype=np.float64), (n,)).copy()
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: Optional[np.ndarray] = None
    value: float = np.nan
    y_ub: Optional[np.ndarray] = None
    y_eq: Optional[np.ndarray] = None
    reduced_costs: Optional[np.ndarray] = None
    dual_value: float = np.nan
    message: str = ""
    gap: float = field(default=np.nan)


def _dual_objective(lp: LinearProgram, y_ub, y_eq) -> float:
    r = lp.c.copy()
    val = 0.0
    if y_ub is not None and lp.a_ub is not None:
        r = r + (lp.a_ub.T @ y_ub if not sp.issparse(lp.a_ub) else lp.a_ub.T.dot(y_ub))
        val -= float(lp.b_ub @ y_ub)
    if y_eq is not None and lp.a_eq is not None:
        r = r + (lp.a_eq.T @ y_eq if not sp.issparse(lp.a_eq) else lp.a_eq.T.dot(y_eq))
        val -= float(lp.b_eq @ y_eq)
    # inf over the box [lb, ub] of r'v; reduced costs on unbounded
    # variables are exactly zero in theory, so clamp float noise there
    eps_r = 1e-9 * (1.0 + float(np.max(np.abs(lp.c)))) + 1e-12 * float(np.max(np.abs(r), initial=0.0))
    r = np.where(np.abs(r) <= eps_r, 0.0, r)
    lo_term = np.where(r > 0, lp.lb, lp.ub)
    with np.errstate(invalid="ignore"):
        contrib = r * lo_term
    contrib[r == 0] = 0.0
    if np.any(np.isinf(contrib)):
        return -np.inf
    return val + float(np.sum(contrib))


def _feasibility_violation(lp: LinearProgram, x) -> float:
    viol = max(float(np.max(lp.lb - x, initial=0.0)), float(np.max(x - lp.ub, initial=0.0)))
    if lp.a_ub is not None:
        viol = max(viol, float(np.max(lp.a_ub @ x - lp.b_ub, initial=0.0)))
    if lp.a_eq is not None:
        viol = max(viol, float(np.max(np.abs(lp.a_eq @ x - lp.b_eq), initial=0.0)))
    return viol


def solve_lp(lp: LinearProgram, tol: float = 1e-8) -> LpSolution:
    """Solve an LP and return a verified primal-dual pair.

    Status is OPTIMAL only when the returned solutions are feasible within
    ``tol`` (relative to problem scale) and the primal and dual objectives
    agree within the same tolerance.
    """
    bounds = list(zip(lp.lb, [None if np.isinf(u) else u for u in lp.ub]))
    res = _scipy_linprog(
        lp.c,
        A_ub=lp.a_ub,
        b_ub=lp.b_ub,
        A_eq=lp.a_eq,
        b_eq=lp.b_eq,
        bounds=bounds,
        method="highs",
        options={
            "primal_feasibility_tolerance": 1e-10,
            "dual_feasibility_tolerance": 1e-10,
        },
    )
    if res.status == 2:
        return LpSolution(status=LpStatus.INFEASIBLE, message=res.message)
    if res.status == 3:
        return LpSolution(status=LpStatus.UNBOUNDED, message=res.message)
    if res.status != 0:
        return LpSolution(status=LpStatus.FAILED, message=res.message)

    x = np.asarray(res.x, dtype=np.float64)
    value = float(res.fun)
    y_ub = -np.asarray(res.ineqlin.marginals, dtype=np.float64) if lp.a_ub is not None else None
    y_eq = -np.asarray(res.eqlin.marginals, dtype=np.float64) if lp.a_eq is not None else None
    reduced = np.asarray(res.lower.marginals, dtype=np.float64) + np.asarray(res.upper.marginals, dtype=np.float64)
    dual_value = _dual_objective(lp, y_ub, y_eq)

    scale = 1.0 + abs(value)
    gap = abs(value - dual_value)
    viol = _feasibility_violation(lp, x)
    if viol > max(tol, 1e-7) * scale or not np.isfinite(dual_value) or gap > max(tol * scale, 1e2 * tol):
        return LpSolution(
            status=LpStatus.FAILED,
            x=x,
            value=value,
            y_ub=y_ub,
            y_eq=y_eq,
            reduced_costs=reduced,
            dual_value=dual_value,
            gap=gap,
            message=f"verification failed (violation {viol:.2e}, gap {gap:.2e})",
        )
    return LpSolution(
        status=LpStatus.OPTIMAL,
        x=x,
        value=value,
        y_ub=y_ub,
        y_eq=y_eq,
        reduced_costs=reduced,
        dual_value=dual_value,
        gap=gap,
        message=res.message,
    )
