"""Horse-race experiment: place bets with parimutuel returns.

n horses race; a bet is on a horse placing (finishing first or second),
so there are K = n(n-1)/2 outcomes, one per unordered pair {j, k},
ordered lexicographically.  Horse speeds are independent, so the win
probabilities beta determine the place-pair probabilities, and the
parimutuel pool (bet fractions proportional to beta) determines the
return matrix

    R[j, jk] = n / (1 + beta_j / beta_k),    R[k, jk] = n / (1 + beta_k / beta_j),

with the two placing horses splitting a pool of n per unit bet.

Win probabilities are sampled as softmax of iid normal draws with
standard deviation 1/2 from a counter-based Philox generator, so
instances are bit-reproducible across platforms from their seed.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .ambiguity import AmbiguitySet, Box, NormBall, Singleton
from .errors import ValidationError
from .market import Bet, BettingMarket, Distribution, log_growth
from .oracle import worst_case
from .solver import SolveReport, solve_drkp, solve_kelly

__all__ = [
    "CANONICAL_SEED",
    "HorseRaceInstance",
    "SweepResult",
    "sample_beta",
    "place_distribution",
    "place_returns",
    "outcome_pairs",
    "make_instance",
    "box_family",
    "ball_family",
    "run_sweep",
]

# Seed whose n=20 instance matches the published experiment: win
# probabilities spanning roughly 20% down to 1%, nominal Kelly growth
# near 4.3%/round, and box worst-case Kelly growth near -2%.
CANONICAL_SEED = 389


def sample_beta(n: int, seed: int) -> np.ndarray:
    """Win probabilities: softmax of iid N(0, 1/4) draws (Philox stream)."""
    if n < 2:
        raise ValidationError("need at least two horses")
    rng = np.random.Generator(np.random.Philox(seed))
    z = 0.5 * rng.standard_normal(n)
    w = np.exp(z - np.max(z))
    return w / w.sum()


def outcome_pairs(n: int) -> List[Tuple[int, int]]:
    """Column order of the place outcomes: (j, k), j < k, lexicographic."""
    return [(j, k) for j in range(n) for k in range(j + 1, n)]


def place_distribution(beta) -> Distribution:
    """Probability that each pair of horses places, from win probabilities."""
    beta = np.asarray(beta, dtype=np.float64)
    if np.min(beta) <= 0.0 or abs(beta.sum() - 1.0) > 1e-9:
        raise ValidationError("win probabilities must be positive and sum to 1")
    n = beta.size
    probs = np.array(
        [beta[j] * beta[k] * (1.0 / (1.0 - beta[j]) + 1.0 / (1.0 - beta[k])) for j, k in outcome_pairs(n)]
    )
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"place probabilities sum to {total!r}; invalid beta")
    return Distribution(probs)


def place_returns(beta) -> np.ndarray:
    """Parimutuel return matrix (n bets x n(n-1)/2 outcomes)."""
    beta = np.asarray(beta, dtype=np.float64)
    n = beta.size
    pairs = outcome_pairs(n)
    R = np.zeros((n, len(pairs)))
    for col, (j, k) in enumerate(pairs):
        R[j, col] = n / (1.0 + beta[j] / beta[k])
        R[k, col] = n / (1.0 + beta[k] / beta[j])
    return R


@dataclass(frozen=True, eq=False)
class HorseRaceInstance:
    n: int
    seed: Optional[int]
    beta: np.ndarray
    market: BettingMarket
    pi_nom: Distribution

    @property
    def K(self) -> int:
        return self.market.K

    @property
    def pairs(self) -> List[Tuple[int, int]]:
        return outcome_pairs(self.n)


def make_instance(n: int, seed: int = CANONICAL_SEED) -> HorseRaceInstance:
    beta = sample_beta(n, seed)
    return HorseRaceInstance(
        n=n,
        seed=seed,
        beta=beta,
        market=BettingMarket(place_returns(beta)),
        pi_nom=place_distribution(beta),
    )


def box_family(pi_nom: Distribution, eta: float) -> AmbiguitySet:
    """Relative box: each probability may move by a fraction eta of itself."""
    if not (0.0 <= eta < 1.0):
        raise ValidationError("eta must be in [0, 1)")
    if eta == 0.0:
        return Singleton(pi_nom)
    return Box(pi_nom, eta * pi_nom.probs)


def ball_family(pi_nom: Distribution, c: float) -> AmbiguitySet:
    """Euclidean ball of radius c around the nominal distribution."""
    if c < 0.0:
        raise ValidationError("c must be nonnegative")
    if c == 0.0:
        return Singleton(pi_nom)
    return NormBall(pi_nom, c * np.eye(pi_nom.K), 2.0)


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Four growth curves across uncertainty-set sizes."""

    sizes: np.ndarray
    nominal_kelly: np.ndarray
    worst_kelly: np.ndarray
    nominal_robust: np.ndarray
    worst_robust: np.ndarray
    converged: np.ndarray
    kelly_report: SolveReport
    robust_reports: List[SolveReport]


def _sweep_workers() -> int:
    raw = os.environ.get("ROBUST_KELLY_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_sweep(
    instance: HorseRaceInstance,
    family: str,
    sizes: Sequence[float],
    tol: float = 1e-6,
    max_iter: int = 10000,
) -> SweepResult:
    """Solve Kelly once and the robust problem per size; evaluate all four curves."""
    sizes = np.asarray(list(sizes), dtype=np.float64)
    if np.any(np.diff(sizes) < 0.0):
        raise ValidationError("sizes must be sorted ascending")
    fam = {"box": box_family, "ball": ball_family}.get(family)
    if fam is None:
        raise ValidationError(f"unknown family {family!r} (expected 'box' or 'ball')")

    market, nom = instance.market, instance.pi_nom
    kelly = solve_kelly(market, nom, tol, max_iter)
    g_nom_k = log_growth(market, kelly.b_star, nom)

    def one(size: float):
        aset = fam(nom, float(size))
        rep = solve_drkp(market, aset, tol, max_iter)
        wc_k = worst_case(market, kelly.b_star, aset)
        g_nom_rk = log_growth(market, rep.b_star, nom)
        return rep, wc_k.value, g_nom_rk

    workers = _sweep_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(one, sizes))
    else:
        results = [one(s) for s in sizes]

    reports = [r[0] for r in results]
    return SweepResult(
        sizes=sizes,
        nominal_kelly=np.full(sizes.size, g_nom_k),
        worst_kelly=np.array([r[1] for r in results]),
        nominal_robust=np.array([r[2] for r in results]),
        worst_robust=np.array([r.value for r in reports]),
        converged=np.array([r.converged for r in reports]),
        kelly_report=kelly,
        robust_reports=reports,
    )
