"""Numpy implementations of the hot inner-loop kernels.

These are the routines the bet optimizer hammers inside its line search
(thousands of calls per solve).  A compiled twin lives in
``_kernels_cy.pyx``; :mod:`robust_kelly.kernels` picks whichever is
available at import time.  Both backends must agree bit-for-bit on their
tie-breaking rules, since solve reports are required to be deterministic.
"""

import numpy as np

__all__ = ["growth_vector", "box_fill", "project_simplex", "ball_worst"]


def growth_vector(y):
    """Elementwise log of the payoff vector, with log(0) mapped to -inf."""
    y = np.asarray(y, dtype=np.float64)
    out = np.full_like(y, -np.inf)
    pos = y > 0.0
    out[pos] = np.log(y[pos])
    return out


def box_fill(x, lo, hi):
    """Minimize pi.x over {1'pi = 1, lo <= pi <= hi} by greedy fill.

    Mass is assigned to coordinates in ascending order of ``x`` on top of
    the mandatory lower bounds.  Returns ``(pi, gamma)`` where ``gamma``
    is the exact multiplier of the sum-to-one constraint (the threshold
    value of ``x`` at which the fill stops), from which optimal box duals
    are recovered in closed form.

    Requires sum(lo) <= 1 <= sum(hi); ties in ``x`` are broken by index.
    """
    x = np.asarray(x, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    pi = lo.copy()
    budget = 1.0 - float(lo.sum())
    order = np.argsort(x, kind="stable")
    last_filled = -1
    for k in order:
        if budget <= 0.0:
            break
        take = hi[k] - lo[k]
        if take <= 0.0:
            continue
        if take > budget:
            take = budget
        pi[k] += take
        budget -= take
        last_filled = k
    # Multiplier of 1'pi = 1: any value between the largest x that received
    # fill and the smallest x with spare capacity certifies optimality.
    if last_filled >= 0:
        gamma = float(x[last_filled])
    else:
        spare = pi < hi
        if np.any(spare):
            gamma = float(np.min(x[spare]))
        else:
            gamma = float(np.min(x[pi > 0.0])) if np.any(pi > 0.0) else 0.0
    return pi, gamma


def project_simplex(v):
    """Euclidean projection of ``v`` onto the probability simplex."""
    v = np.asarray(v, dtype=np.float64)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u * idx > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0), theta


def ball_worst(x, pi_nom, c, rel_tol=1e-14, max_iter=200):
    """Minimize pi.x over {pi in simplex, ||pi - pi_nom||_2 <= c}.

    Bisects the multiplier t of the squared-distance penalty: the inner
    minimizer is a simplex projection, and its distance to ``pi_nom`` is
    nonincreasing in t.  Returns ``(pi, t, gamma)`` with ``gamma`` the
    simplex multiplier of the final inner projection; ``t`` is the
    penalty coefficient (0 when the ball constraint is slack).
    """
    x = np.asarray(x, dtype=np.float64)
    pi_nom = np.asarray(pi_nom, dtype=np.float64)

    def inner(t):
        pi, theta = project_simplex(pi_nom - x / (2.0 * t))
        d = float(np.linalg.norm(pi - pi_nom))
        return pi, d, 2.0 * t * theta

    # Tiny t: inner minimizer is the LP optimum over the simplex.
    t_lo = 1e-13 * max(1.0, float(np.max(np.abs(x))))
    pi, d, gamma = inner(t_lo)
    if d <= c:
        return pi, 0.0, gamma
    t_hi = max(1.0, t_lo)
    pi_hi, d_hi, gamma_hi = inner(t_hi)
    grow = 0
    while d_hi > c and grow < 200:
        t_hi *= 4.0
        pi_hi, d_hi, gamma_hi = inner(t_hi)
        grow += 1
    best = (pi_hi, t_hi, gamma_hi)  # feasible side
    for _ in range(max_iter):
        t_mid = 0.5 * (t_lo + t_hi)
        pi_m, d_m, gamma_m = inner(t_mid)
        if d_m <= c:
            t_hi = t_mid
            best = (pi_m, t_mid, gamma_m)
        else:
            t_lo = t_mid
        if t_hi - t_lo <= rel_tol * t_hi:
            break
    return best
