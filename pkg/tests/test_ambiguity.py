import numpy as np
import pytest

from robust_kelly.ambiguity import (
    Box,
    ConvexHull,
    DivergenceBall,
    NormBall,
    Polyhedral,
    Singleton,
    WassersteinBall,
    contains,
    wasserstein_distance,
)
from robust_kelly.divergences import KL, REVERSE_KL, TOTAL_VARIATION
from robust_kelly.errors import DimensionError, InfeasibleError, ValidationError
from robust_kelly.market import Distribution

from support import random_ambiguity


def test_zero_radius_box_is_nominal_only():
    nom = Distribution([0.6, 0.4])
    box = Box(nom, np.zeros(2))
    assert contains(box, nom)
    assert not contains(box, Distribution([0.5, 0.5]))


def test_divergence_ball_contains_nominal():
    nom = Distribution([0.6, 0.4])
    ball = DivergenceBall(nom, KL, 1e-6)
    assert contains(ball, nom)


def test_hull_membership_by_lp():
    hull = ConvexHull([Distribution([1.0, 0.0]), Distribution([0.0, 1.0])])
    assert contains(hull, Distribution([0.3, 0.7]))
    narrow = ConvexHull([Distribution([0.5, 0.5]), Distribution([0.6, 0.4])])
    assert not contains(narrow, Distribution([0.9, 0.1]))
    assert contains(narrow, Distribution([0.55, 0.45]))


def test_every_nominal_carrier_contains_nominal():
    rng = np.random.default_rng(17)
    for fam in ("singleton", "box", "normball", "normball_cI", "divergence", "wasserstein"):
        for _ in range(5):
            aset = random_ambiguity(rng, int(rng.integers(2, 6)), fam)
            assert contains(aset, aset.pi_nom, 1e-9), fam


def test_box_equals_stacked_polyhedral_membership():
    rng = np.random.default_rng(23)
    for _ in range(20):
        K = int(rng.integers(2, 6))
        box = random_ambiguity(rng, K, "box")
        poly = box.as_polyhedral()
        for _ in range(40):
            pi = Distribution(rng.dirichlet(np.ones(K)))
            assert contains(box, pi) == contains(poly, pi)


def test_wasserstein_distance_example():
    cost = np.array([[0.0, 1.0], [1.0, 0.0]])
    d = wasserstein_distance([0.5, 0.5], [0.6, 0.4], cost)
    assert d == pytest.approx(0.1, abs=1e-10)


def test_wasserstein_membership():
    nom = Distribution([0.6, 0.4])
    ws = WassersteinBall(nom, np.array([[0.0, 1.0], [1.0, 0.0]]), 0.05)
    assert contains(ws, Distribution([0.58, 0.42]))
    assert not contains(ws, Distribution([0.4, 0.6]))


def test_polyhedral_requires_nonempty():
    with pytest.raises(InfeasibleError):
        Polyhedral(K=2, A1=np.eye(2), d1=np.array([-1.0, -1.0]))


def test_validation_errors():
    nom = Distribution([0.6, 0.4])
    with pytest.raises(ValidationError):
        Box(nom, np.array([-0.1, 0.1]))
    with pytest.raises(ValidationError):
        NormBall(nom, np.zeros((2, 2)), 2.0)  # singular
    with pytest.raises(ValidationError):
        NormBall(nom, np.eye(2), 0.5)  # p < 1
    with pytest.raises(ValidationError):
        DivergenceBall(Distribution([1.0, 0.0]), KL, 0.1)  # zero entry
    with pytest.raises(ValidationError):
        DivergenceBall(nom, KL, 0.0)
    with pytest.raises(ValidationError):
        WassersteinBall(nom, np.array([[0.5, 1.0], [1.0, 0.0]]), 0.1)  # diag
    with pytest.raises(ValidationError):
        WassersteinBall(nom, np.array([[0.0, -1.0], [1.0, 0.0]]), 0.1)
    with pytest.raises(DimensionError):
        contains(Box(nom, np.zeros(2)), Distribution([1.0 / 3] * 3))


def test_norm_ball_accepts_infinite_p():
    nom = Distribution([0.5, 0.5])
    ball = NormBall(nom, 0.1 * np.eye(2), np.inf)
    assert ball.q == 1.0
    assert contains(ball, Distribution([0.45, 0.55]))
    assert not contains(ball, Distribution([0.3, 0.7]))


def test_reverse_kl_infinite_on_lost_support():
    nom = Distribution([0.5, 0.5])
    ball = DivergenceBall(nom, REVERSE_KL, 5.0)
    assert not contains(ball, Distribution([1.0, 0.0]))  # f(0) = inf


def test_tv_ball_is_l1_ball():
    nom = Distribution([0.6, 0.4])
    ball = DivergenceBall(nom, TOTAL_VARIATION, 0.2)
    assert contains(ball, Distribution([0.5, 0.5]))  # l1 distance 0.2
    assert not contains(ball, Distribution([0.49, 0.51]))


def test_divergence_value_alpha_limits():
    from robust_kelly.ambiguity import divergence_value
    from robust_kelly.divergences import KL, REVERSE_KL, alpha_divergence

    rng = np.random.default_rng(83)
    for _ in range(10):
        K = int(rng.integers(2, 6))
        nom = Distribution(rng.dirichlet(np.ones(K)) * 0.8 + 0.2 / K)
        pi = Distribution(rng.dirichlet(np.ones(K)) * 0.8 + 0.2 / K)
        kl = divergence_value(KL, pi, nom)
        rkl = divergence_value(REVERSE_KL, pi, nom)
        for a in (1 + 1e-6, 1 - 1e-6):
            assert divergence_value(alpha_divergence(a), pi, nom) == pytest.approx(kl, abs=1e-4)
        for a in (1e-6, -1e-6):
            assert divergence_value(alpha_divergence(a), pi, nom) == pytest.approx(rkl, abs=1e-4)
