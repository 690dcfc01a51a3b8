"""Compiled twins of the hot kernels in ``_kernels_py``.

Semantics (including tie-breaking) must match the numpy fallback
bit-for-bit: solve reports are required to be deterministic regardless
of which backend got imported.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, log, sqrt

cnp.import_array()


def growth_vector(y):
    """Elementwise log of the payoff vector, with log(0) mapped to -inf."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t k, n = yy.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    for k in range(n):
        out[k] = log(yy[k]) if yy[k] > 0.0 else -INFINITY
    return out


def box_fill(x, lo, hi):
    """Greedy minimizer of pi.x over {1'pi = 1, lo <= pi <= hi}.

    Returns (pi, gamma); see the numpy twin for the contract.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ll = np.ascontiguousarray(lo, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hh = np.ascontiguousarray(hi, dtype=np.float64)
    cdef Py_ssize_t n = xx.shape[0]
    cdef cnp.ndarray[cnp.intp_t, ndim=1] order = np.argsort(xx, kind="stable")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pi = ll.copy()
    # same pairwise summation as the numpy twin, for bit-identical budgets
    cdef double budget = 1.0 - float(np.sum(ll))
    cdef Py_ssize_t i, k
    cdef Py_ssize_t last_filled = -1
    cdef double take, gamma
    for i in range(n):
        if budget <= 0.0:
            break
        k = order[i]
        take = hh[k] - ll[k]
        if take <= 0.0:
            continue
        if take > budget:
            take = budget
        pi[k] += take
        budget -= take
        last_filled = k
    if last_filled >= 0:
        gamma = xx[last_filled]
    else:
        gamma = INFINITY
        for k in range(n):
            if pi[k] < hh[k] and xx[k] < gamma:
                gamma = xx[k]
        if gamma == INFINITY:
            gamma = INFINITY
            for k in range(n):
                if pi[k] > 0.0 and xx[k] < gamma:
                    gamma = xx[k]
            if gamma == INFINITY:
                gamma = 0.0
    return pi, gamma


cdef double _project_simplex_into(const double[::1] v, const double[::1] srt, double[::1] out) nogil:
    # srt must hold v sorted in DESCENDING order on entry; returns theta.
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i, rho = 0
    cdef double css = 0.0, theta = 0.0
    cdef double running = 0.0
    for i in range(n):
        running += srt[i]
        if srt[i] * (i + 1) > running - 1.0:
            rho = i
            css = running - 1.0
    theta = css / (rho + 1.0)
    for i in range(n):
        out[i] = v[i] - theta
        if out[i] < 0.0:
            out[i] = 0.0
    return theta


def project_simplex(v):
    """Euclidean projection of ``v`` onto the probability simplex."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] srt = np.sort(vv)[::-1].copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(vv)
    cdef double theta = _project_simplex_into(vv, srt, out)
    return out, theta


def ball_worst(x, pi_nom, double c, double rel_tol=1e-14, int max_iter=200):
    """Minimize pi.x over {pi in simplex, ||pi - pi_nom||_2 <= c}.

    Bisection on the squared-distance penalty multiplier; returns
    (pi, t, gamma) exactly as the numpy twin does.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] nom = np.ascontiguousarray(pi_nom, dtype=np.float64)
    cdef Py_ssize_t k, n = xx.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pi = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] best_pi = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] theta_buf = np.zeros(1, dtype=np.float64)

    cdef double xmax = 1.0
    for k in range(n):
        if xx[k] > xmax:
            xmax = xx[k]
        if -xx[k] > xmax:
            xmax = -xx[k]

    cdef double t_lo, t_hi, t_mid, d, best_t, best_gamma
    cdef int grow, it

    t_lo = 1e-13 * xmax

    d = _ball_inner(xx, nom, t_lo, v, pi, theta_buf)
    if d <= c:
        return pi, 0.0, 2.0 * t_lo * theta_buf[0]

    t_hi = t_lo if t_lo > 1.0 else 1.0
    d = _ball_inner(xx, nom, t_hi, v, pi, theta_buf)
    grow = 0
    while d > c and grow < 200:
        t_hi *= 4.0
        d = _ball_inner(xx, nom, t_hi, v, pi, theta_buf)
        grow += 1
    best_pi[:] = pi
    best_t = t_hi
    best_gamma = 2.0 * t_hi * theta_buf[0]
    for it in range(max_iter):
        t_mid = 0.5 * (t_lo + t_hi)
        d = _ball_inner(xx, nom, t_mid, v, pi, theta_buf)
        if d <= c:
            t_hi = t_mid
            best_pi[:] = pi
            best_t = t_mid
            best_gamma = 2.0 * t_mid * theta_buf[0]
        else:
            t_lo = t_mid
        if t_hi - t_lo <= rel_tol * t_hi:
            break
    return best_pi, best_t, best_gamma


cdef double _ball_inner(const double[::1] x, const double[::1] nom, double t,
                        double[::1] v, double[::1] pi, double[::1] theta_out):
    # pi <- proj_simplex(nom - x / (2 t)); returns ||pi - nom||_2 and
    # writes the projection threshold into theta_out[0].
    cdef Py_ssize_t k, n = x.shape[0]
    for k in range(n):
        v[k] = nom[k] - x[k] / (2.0 * t)
    srt = np.sort(np.asarray(v))[::-1].copy()
    theta_out[0] = _project_simplex_into(v, srt, pi)
    cdef double d2 = 0.0, diff
    for k in range(n):
        diff = pi[k] - nom[k]
        d2 += diff * diff
    return sqrt(d2)
