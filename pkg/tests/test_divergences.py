import numpy as np
import pytest

from robust_kelly.ambiguity import divergence_value
from robust_kelly.divergences import (
    HELLINGER,
    KL,
    NEYMAN_CHI2,
    PEARSON_CHI2,
    REVERSE_KL,
    TOTAL_VARIATION,
    alpha_divergence,
    conjugate,
    conjugate_domain_sup,
    conjugate_prime,
    conjugate_table,
    f_value,
    perspective,
)
from robust_kelly.errors import ValidationError
from robust_kelly.market import Distribution

NAMED = [KL, REVERSE_KL, PEARSON_CHI2, NEYMAN_CHI2, HELLINGER, TOTAL_VARIATION]
ALPHAS = [-1.0, 0.5, 2.0, 3.0]


def numeric_conjugate(kind, s, n=4_000_001):
    """Independent oracle: sup over a dense t >= 0 grid of t s - f(t)."""
    t_star = conjugate_prime(kind, s)
    t_hi = 1e3 if not np.isfinite(t_star) else max(1e3, 5.0 * float(t_star))
    t = np.linspace(0.0, t_hi, n)
    vals = t * s - np.asarray(f_value(kind, t))
    return float(np.max(vals[np.isfinite(vals)]))


def sample_in_domain(kind, rng, count=12):
    sup = conjugate_domain_sup(kind)
    hi = min(sup - 0.05, 3.0) if np.isfinite(sup) else 3.0
    return rng.uniform(-3.0, hi, size=count)


def test_generators_vanish_at_one():
    for kind in NAMED + [alpha_divergence(a) for a in ALPHAS]:
        assert f_value(kind, 1.0) == pytest.approx(0.0, abs=1e-15)


def test_kl_conjugate_values():
    pair = conjugate_table(KL)
    assert pair.f_star(0.0) == pytest.approx(0.0)  # exp(0) - 1
    assert pair.f_star(1.0) == pytest.approx(np.e - 1.0)


def test_total_variation_conjugate_piecewise():
    pair = conjugate_table(TOTAL_VARIATION)
    assert pair.f_star(0.5) == pytest.approx(0.5)
    assert pair.f_star(-2.0) == pytest.approx(-1.0)
    assert pair.f_star(1.0) == pytest.approx(1.0)
    assert np.isinf(pair.f_star(1.0 + 1e-9))


def test_alpha_two_matches_pearson():
    a2 = alpha_divergence(2.0)
    s = np.linspace(-0.9, 4.0, 50)
    assert np.allclose(conjugate(a2, s), conjugate(PEARSON_CHI2, s), atol=1e-12)
    t = np.linspace(0.0, 5.0, 50)
    assert np.allclose(f_value(a2, t), f_value(PEARSON_CHI2, t), atol=1e-12)


def test_alpha_relabels_named_kinds():
    assert alpha_divergence(1.0) is KL
    assert alpha_divergence(0.0) is REVERSE_KL
    # Hellinger corresponds to the exponent 1/2 in this parametrization
    ah = alpha_divergence(0.5)
    s = np.linspace(-5.0, 1.9, 40)
    assert np.allclose(conjugate(ah, s), conjugate(HELLINGER, s), atol=1e-12)
    an = alpha_divergence(-1.0)
    s = np.linspace(-5.0, 0.49, 40)
    assert np.allclose(conjugate(an, s), conjugate(NEYMAN_CHI2, s), atol=1e-11)


@pytest.mark.parametrize("kind", NAMED + [alpha_divergence(a) for a in ALPHAS], ids=str)
def test_fenchel_young_inequality(kind):
    rng = np.random.default_rng(hash(str(kind)) % 2**32)
    ts = rng.uniform(0.0, 8.0, size=40)
    ss = sample_in_domain(kind, rng, 40)
    F = np.asarray(f_value(kind, ts))
    G = np.asarray(conjugate(kind, ss))
    lhs = F[:, None] + G[None, :]
    rhs = ts[:, None] * ss[None, :]
    assert np.all(lhs >= rhs - 1e-10)


@pytest.mark.parametrize("kind", NAMED + [alpha_divergence(a) for a in ALPHAS], ids=str)
def test_conjugate_matches_numeric_sup(kind):
    rng = np.random.default_rng(abs(hash(str(kind))) % 2**32 + 1)
    for s in sample_in_domain(kind, rng, 6):
        closed = conjugate(kind, float(s))
        numeric = numeric_conjugate(kind, float(s))
        assert closed == pytest.approx(numeric, abs=1e-6)


@pytest.mark.parametrize("kind", NAMED + [alpha_divergence(a) for a in ALPHAS], ids=str)
def test_conjugate_nondecreasing_and_convex(kind):
    sup = conjugate_domain_sup(kind)
    hi = min(sup - 1e-6, 3.0) if np.isfinite(sup) else 3.0
    s = np.linspace(-4.0, hi, 2001)
    v = np.asarray(conjugate(kind, s))
    d = np.diff(v)
    assert np.all(d >= -1e-12)
    assert np.all(np.diff(d) >= -1e-9)


def test_alpha_limits_approach_kl_and_reverse_kl():
    rng = np.random.default_rng(3)
    s = rng.uniform(-2.0, 0.8, size=30)
    for a in (1 + 1e-6, 1 - 1e-6):
        approx = np.asarray(conjugate(alpha_divergence(a), s))
        exact = np.asarray(conjugate(KL, s))
        assert np.max(np.abs(approx - exact)) < 1e-4
    for a in (1e-6, -1e-6):
        approx = np.asarray(conjugate(alpha_divergence(a), s))
        exact = np.asarray(conjugate(REVERSE_KL, s))
        assert np.max(np.abs(approx - exact)) < 1e-4


def test_conjugate_prime_is_derivative():
    rng = np.random.default_rng(4)
    h = 1e-7
    for kind in NAMED + [alpha_divergence(a) for a in ALPHAS]:
        if kind.name == "total_variation":
            continue
        for s in sample_in_domain(kind, rng, 6):
            s = float(s)
            num = (conjugate(kind, s + h) - conjugate(kind, s - h)) / (2 * h)
            assert conjugate_prime(kind, s) == pytest.approx(num, rel=1e-5, abs=1e-6)


def test_perspective_limit_at_zero():
    assert perspective(KL, 0.0, -1.0) == 0.0
    assert perspective(KL, 0.0, 0.0) == 0.0
    assert np.isinf(perspective(KL, 0.0, 1e-9))
    # matches lam * f*(z/lam) continuously as lam shrinks
    for z in (-0.5, -0.01):
        vals = [perspective(KL, lam, z) for lam in (1e-2, 1e-4, 1e-6)]
        assert abs(vals[-1]) < abs(vals[0]) + 1e-12
        assert vals[-1] == pytest.approx(0.0, abs=1e-4)


def test_divergence_value_examples():
    pi = Distribution([0.5, 0.5])
    nom = Distribution([0.6, 0.4])
    # direct sum pi log(pi/nom)
    expect_kl = 0.5 * np.log(0.5 / 0.6) + 0.5 * np.log(0.5 / 0.4)
    assert divergence_value(KL, pi, nom) == pytest.approx(expect_kl, abs=1e-12)
    assert expect_kl == pytest.approx(0.0204110, abs=1e-7)
    # total variation unfolds to the l1 distance
    assert divergence_value(TOTAL_VARIATION, pi, nom) == pytest.approx(0.2, abs=1e-14)


def test_divergence_value_zero_iff_equal():
    rng = np.random.default_rng(9)
    for kind in NAMED + [alpha_divergence(a) for a in ALPHAS]:
        for _ in range(10):
            K = int(rng.integers(2, 6))
            nom = Distribution(rng.dirichlet(np.ones(K)) * 0.9 + 0.1 / K)
            pi = Distribution(rng.dirichlet(np.ones(K)) * 0.9 + 0.1 / K)
            assert divergence_value(kind, nom, nom) == pytest.approx(0.0, abs=1e-12)
            d = divergence_value(kind, pi, nom)
            assert d >= -1e-14
            if np.max(np.abs(pi.probs - nom.probs)) > 1e-6:
                assert d > 0.0


def test_alpha_requires_exponent_and_rejects_degenerate():
    with pytest.raises(ValidationError):
        from robust_kelly.divergences import DivergenceKind

        DivergenceKind("alpha")
    with pytest.raises(ValidationError):
        from robust_kelly.divergences import DivergenceKind

        DivergenceKind("alpha", 1.0)
