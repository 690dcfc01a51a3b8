"""Shared test helpers: brute-force oracles and random instance generators.

The grid minimizers here are deliberately independent of the library's
solution paths: membership masks are computed from each family's
defining constraints directly, and transport distances come from
enumerating Kantorovich dual vertices, so grid values cross-check the
oracles rather than replaying them.
"""

import itertools

import numpy as np

from robust_kelly.ambiguity import (
    Box,
    ConvexHull,
    DivergenceBall,
    NormBall,
    Polyhedral,
    Singleton,
    WassersteinBall,
)
from robust_kelly.divergences import f_value
from robust_kelly.market import Bet, BettingMarket, Distribution


def simplex_grid_chunks(K: int, steps: int, chunk: int = 400_000):
    """Yield (m, K) arrays covering the grid {v/steps : v in Z, sum v = steps}."""
    if K == 1:
        yield np.array([[1.0]])
        return
    buf = []
    total = 0
    for head in _compositions(steps, K):
        buf.append(head)
        total += 1
        if total == chunk:
            yield np.array(buf, dtype=np.float64) / steps
            buf, total = [], 0
    if buf:
        yield np.array(buf, dtype=np.float64) / steps


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _vectorized_member(aset, P: np.ndarray, tol: float) -> np.ndarray:
    """Feasibility mask for a batch of simplex points, per family."""
    if isinstance(aset, Singleton):
        return np.max(np.abs(P - aset.pi_nom.probs), axis=1) <= tol
    if isinstance(aset, Box):
        return np.all(np.abs(P - aset.pi_nom.probs) <= aset.rho + tol, axis=1)
    if isinstance(aset, Polyhedral):
        ok = np.ones(P.shape[0], dtype=bool)
        if aset.A0 is not None:
            ok &= np.max(np.abs(P @ aset.A0.T - aset.d0), axis=1) <= tol
        if aset.A1 is not None:
            ok &= np.max(P @ aset.A1.T - aset.d1, axis=1) <= tol
        return ok
    if isinstance(aset, NormBall):
        Z = (P - aset.pi_nom.probs) @ aset.W_inv.T
        p = aset.p
        if np.isinf(p):
            r = np.max(np.abs(Z), axis=1)
        else:
            r = np.sum(np.abs(Z) ** p, axis=1) ** (1.0 / p)
        return r <= 1.0 + tol
    if isinstance(aset, DivergenceBall):
        nom = aset.pi_nom.probs
        vals = np.asarray(f_value(aset.kind, P / nom))
        D = vals @ nom
        return D <= aset.epsilon + tol
    if isinstance(aset, ConvexHull):
        V = aset.V
        if V.shape[0] == V.shape[1]:
            W = np.linalg.solve(V.T, P.T).T
            return np.all(W >= -1e-7, axis=1)
        raise NotImplementedError("vectorized hull mask needs square vertex matrix")
    if isinstance(aset, WassersteinBall):
        D = transport_distance_batch(P, aset.pi_nom.probs, aset.cost)
        return D <= aset.s + tol
    raise NotImplementedError(type(aset).__name__)


def kantorovich_vertices(cost: np.ndarray):
    """Vertices (u, v) of {u_i + v_j <= c_ij, u_0 = 0} with finite coords.

    The transport distance is max over these vertices of pi'u + nom'v,
    which is linear in pi, so a batch of distances is one matmul.
    """
    K = cost.shape[0]
    nvar = 2 * K - 1  # u_1..u_{K-1}, v_0..v_{K-1}
    rows = []
    rhs = []
    for i in range(K):
        for j in range(K):
            row = np.zeros(nvar)
            if i > 0:
                row[i - 1] = 1.0
            row[K - 1 + j] = 1.0
            rows.append(row)
            rhs.append(cost[i, j])
    rows = np.array(rows)
    rhs = np.array(rhs)
    verts = []
    for idx in itertools.combinations(range(len(rows)), nvar):
        A = rows[list(idx)]
        if abs(np.linalg.det(A)) < 1e-9:
            continue
        sol = np.linalg.solve(A, rhs[list(idx)])
        if np.all(rows @ sol <= rhs + 1e-9):
            verts.append(sol)
    verts = np.array(verts)
    U = np.hstack([np.zeros((len(verts), 1)), verts[:, : K - 1]])
    V = verts[:, K - 1 :]
    return U, V


def transport_distance_batch(P: np.ndarray, nom: np.ndarray, cost: np.ndarray) -> np.ndarray:
    U, V = kantorovich_vertices(cost)
    return np.max(P @ U.T + (V @ nom)[None, :], axis=1)


def grid_min(x: np.ndarray, aset, pitch: float = 1e-3, tol: float = 1e-9) -> float:
    """Exhaustive grid minimization of pi'x over the set (brute force)."""
    steps = int(round(1.0 / pitch))
    best = np.inf
    for P in simplex_grid_chunks(aset.K, steps):
        mask = _vectorized_member(aset, P, tol)
        if np.any(mask):
            best = min(best, float(np.min(P[mask] @ x)))
    return best


def random_market(rng, n: int, K: int, lo: float = 0.5, hi: float = 2.0) -> BettingMarket:
    """Market with strictly positive returns (no -inf growth anywhere)."""
    R = rng.uniform(lo, hi, size=(n, K))
    return BettingMarket(R)


def random_interior_bet(rng, n: int) -> Bet:
    return Bet(rng.dirichlet(np.full(n, 5.0)))


def random_distribution(rng, K: int, min_mass: float = 0.02) -> Distribution:
    p = rng.dirichlet(np.full(K, 3.0))
    p = (p + min_mass) / (1.0 + K * min_mass)
    return Distribution(p)


def random_ambiguity(rng, K: int, family: str):
    """One random instance of the requested family."""
    nom = random_distribution(rng, K)
    if family == "singleton":
        return Singleton(nom)
    if family == "box":
        return Box(nom, rng.uniform(0.005, 0.15, size=K))
    if family == "hull":
        verts = [random_distribution(rng, K) for _ in range(rng.integers(2, K + 2))]
        return ConvexHull(verts)
    if family == "polyhedral":
        # random box written as generic inequalities, plus one extra cut;
        # half the time also an equality row through a feasible point
        rho = rng.uniform(0.02, 0.2, size=K)
        A1 = np.vstack([np.eye(K), -np.eye(K), rng.normal(size=(1, K))])
        d1 = np.concatenate([nom.probs + rho, rho - nom.probs, [A1[-1] @ nom.probs + rng.uniform(0.05, 0.3)]])
        A0 = d0 = None
        if rng.random() < 0.5:
            A0 = rng.normal(size=(1, K))
            d0 = A0 @ nom.probs  # nom stays feasible
        return Polyhedral(K=K, A0=A0, d0=d0, A1=A1, d1=d1)
    if family == "normball":
        p = rng.choice([1.0, 1.5, 2.0, 3.0, np.inf])
        W = rng.uniform(0.02, 0.2) * (np.eye(K) + rng.uniform(-0.2, 0.2, size=(K, K)))
        while np.linalg.cond(W) > 1e6:
            W = rng.uniform(0.02, 0.2) * (np.eye(K) + rng.uniform(-0.2, 0.2, size=(K, K)))
        return NormBall(nom, W, p)
    if family == "normball_cI":
        return NormBall(nom, rng.uniform(0.01, 0.2) * np.eye(K), 2.0)
    if family == "divergence":
        kinds = ["kl", "reverse_kl", "pearson_chi2", "neyman_chi2", "hellinger", "total_variation", "alpha"]
        name = kinds[rng.integers(0, len(kinds))]
        from robust_kelly.divergences import DivergenceKind, alpha_divergence

        kind = alpha_divergence(float(rng.choice([-1.5, 0.5, 2.5, 3.0]))) if name == "alpha" else DivergenceKind(name)
        return DivergenceBall(nom, kind, float(rng.uniform(0.002, 0.1)))
    if family == "wasserstein":
        C = rng.uniform(0.2, 2.0, size=(K, K))
        C = 0.5 * (C + C.T)
        np.fill_diagonal(C, 0.0)
        return WassersteinBall(nom, C, float(rng.uniform(0.01, 0.3)))
    raise ValueError(family)
