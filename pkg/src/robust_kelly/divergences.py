"""f-divergence generators and their Fenchel conjugates.

Each divergence is generated by a convex f on [0, inf) with f(1) = 0; the
discrepancy between distributions is sum_k nom_k * f(pi_k / nom_k).  The
conjugates f*(s) = sup_{t>=0} (t s - f(t)) drive the dual reformulation
of worst-case growth over divergence balls, so their domains (and the
constant continuation where the sup is attained at t = 0) matter as much
as their formulas.

The one-parameter power family

    f_a(t) = (t^a - 1 - a(t - 1)) / (a (a - 1)),   a not in {0, 1}

has conjugate f*_a(s) = ((1 + (a-1) s)^{a/(a-1)} - 1) / a and interpolates
the named divergences: a -> 1 is KL, a -> 0 reverse KL, a = 2 Pearson
chi-square, a = -1 Neyman chi-square, a = 1/2 Hellinger.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError

__all__ = [
    "DivergenceKind",
    "ConjugatePair",
    "conjugate_table",
    "f_value",
    "conjugate",
    "conjugate_prime",
    "conjugate_domain_sup",
    "perspective",
    "KL",
    "REVERSE_KL",
    "PEARSON_CHI2",
    "NEYMAN_CHI2",
    "HELLINGER",
    "TOTAL_VARIATION",
    "alpha_divergence",
]

_NAMES = {"kl", "reverse_kl", "pearson_chi2", "neyman_chi2", "hellinger", "total_variation", "alpha"}


@dataclass(frozen=True)
class DivergenceKind:
    """Tag identifying one divergence generator (plus alpha when relevant)."""

    name: str
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.name not in _NAMES:
            raise ValidationError(f"unknown divergence kind {self.name!r}")
        if self.name == "alpha":
            if self.alpha is None:
                raise ValidationError("alpha divergence needs its exponent")
            if self.alpha in (0.0, 1.0):
                raise ValidationError("alpha in {0, 1} is KL/reverse KL; construct those directly")
        elif self.alpha is not None:
            raise ValidationError("alpha only applies to the power family")

    def __str__(self) -> str:
        return f"alpha({self.alpha})" if self.name == "alpha" else self.name


KL = DivergenceKind("kl")
REVERSE_KL = DivergenceKind("reverse_kl")
PEARSON_CHI2 = DivergenceKind("pearson_chi2")
NEYMAN_CHI2 = DivergenceKind("neyman_chi2")
HELLINGER = DivergenceKind("hellinger")
TOTAL_VARIATION = DivergenceKind("total_variation")


def alpha_divergence(alpha: float) -> DivergenceKind:
    """Power-family divergence; alpha 0/1 dispatch to reverse KL / KL."""
    if alpha == 1.0:
        return KL
    if alpha == 0.0:
        return REVERSE_KL
    return DivergenceKind("alpha", float(alpha))


def _promote(v):
    v = np.asarray(v, dtype=np.float64)
    return (np.atleast_1d(v), v.ndim == 0)


def _demote(out, was_scalar):
    return float(out[0]) if was_scalar else out


def f_value(kind: DivergenceKind, t):
    """Generator f evaluated elementwise on t >= 0 (+inf off its domain)."""
    t, scalar = _promote(t)
    out = np.full(t.shape, np.inf)
    neg = t < 0.0
    pos = t > 0.0
    zero = t == 0.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind.name == "kl":
            out[pos] = t[pos] * np.log(t[pos]) - t[pos] + 1.0
            out[zero] = 1.0
        elif kind.name == "reverse_kl":
            out[pos] = -np.log(t[pos]) + t[pos] - 1.0
        elif kind.name == "pearson_chi2":
            out[~neg] = 0.5 * (t[~neg] - 1.0) ** 2
        elif kind.name == "neyman_chi2":
            out[pos] = 0.5 * (t[pos] - 1.0) ** 2 / t[pos]
        elif kind.name == "hellinger":
            out[~neg] = 2.0 * (np.sqrt(t[~neg]) - 1.0) ** 2
        elif kind.name == "total_variation":
            out[~neg] = np.abs(t[~neg] - 1.0)
        else:
            a = kind.alpha
            out[pos] = (t[pos] ** a - 1.0 - a * (t[pos] - 1.0)) / (a * (a - 1.0))
            if a > 0:
                out[zero] = 1.0 / a
    out[neg] = np.inf
    return _demote(out, scalar)


def conjugate_domain_sup(kind: DivergenceKind) -> float:
    """Supremum of the conjugate's effective domain."""
    if kind.name in ("kl", "pearson_chi2"):
        return np.inf
    if kind.name == "reverse_kl":
        return 1.0
    if kind.name == "neyman_chi2":
        return 0.5
    if kind.name == "hellinger":
        return 2.0
    if kind.name == "total_variation":
        return 1.0
    a = kind.alpha
    return np.inf if a > 1.0 else 1.0 / (1.0 - a)


def conjugate(kind: DivergenceKind, s):
    """Fenchel conjugate f*(s), elementwise; +inf outside its domain.

    Where the defining sup is attained at t = 0 the conjugate continues
    as the constant -f(0) (e.g. -1/2 below s = -1 for Pearson); dropping
    that continuation would wrongly forbid zero worst-case probabilities.
    """
    s, scalar = _promote(s)
    out = np.full(s.shape, np.inf)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind.name == "kl":
            out = np.exp(s) - 1.0
        elif kind.name == "reverse_kl":
            m = s < 1.0
            out[m] = -np.log1p(-s[m])
        elif kind.name == "pearson_chi2":
            out = np.where(s >= -1.0, 0.5 * (s + 1.0) ** 2 - 0.5, -0.5)
        elif kind.name == "neyman_chi2":
            m = s <= 0.5
            out[m] = 1.0 - np.sqrt(1.0 - 2.0 * s[m])
        elif kind.name == "hellinger":
            m = s < 2.0
            out[m] = 2.0 * s[m] / (2.0 - s[m])
        elif kind.name == "total_variation":
            m = s <= 1.0
            out[m] = np.where(s[m] < -1.0, -1.0, s[m])
        else:
            a = kind.alpha
            base = 1.0 + (a - 1.0) * s
            if a > 1.0:
                out = np.where(base > 0.0, (np.maximum(base, 0.0) ** (a / (a - 1.0)) - 1.0) / a, -1.0 / a)
            else:
                m = base > 0.0 if 0.0 < a < 1.0 else base >= 0.0
                out[m] = (base[m] ** (a / (a - 1.0)) - 1.0) / a
                if a < 0.0:
                    out[base == 0.0] = -1.0 / a
    return _demote(out, scalar)


def conjugate_prime(kind: DivergenceKind, s):
    """Derivative of f* (the maximizing ratio t); a.e. value at kinks."""
    s, scalar = _promote(s)
    out = np.full(s.shape, np.inf)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if kind.name == "kl":
            out = np.exp(s)
        elif kind.name == "reverse_kl":
            m = s < 1.0
            out[m] = 1.0 / (1.0 - s[m])
        elif kind.name == "pearson_chi2":
            out = np.maximum(s + 1.0, 0.0)
        elif kind.name == "neyman_chi2":
            m = s < 0.5
            out[m] = 1.0 / np.sqrt(1.0 - 2.0 * s[m])
        elif kind.name == "hellinger":
            m = s < 2.0
            out[m] = 4.0 / (2.0 - s[m]) ** 2
        elif kind.name == "total_variation":
            out = np.where(s < -1.0, 0.0, np.where(s <= 1.0, 1.0, np.inf))
        else:
            a = kind.alpha
            base = 1.0 + (a - 1.0) * s
            if a > 1.0:
                out = np.maximum(base, 0.0) ** (1.0 / (a - 1.0))
            else:
                m = base > 0.0
                out[m] = base[m] ** (1.0 / (a - 1.0))
    return _demote(out, scalar)


def perspective(kind: DivergenceKind, lam: float, z):
    """(lam * f)*(z) = lam * f*(z / lam), with the exact lam = 0 limit.

    At lam = 0 the sup defining the scaled conjugate is 0 for z <= 0 and
    +inf otherwise.
    """
    z, scalar = _promote(z)
    if lam < 0.0:
        raise ValidationError("perspective needs lam >= 0")
    if lam == 0.0:
        out = np.where(z <= 0.0, 0.0, np.inf)
        return _demote(out, scalar)
    out = lam * np.atleast_1d(conjugate(kind, z / lam))
    return _demote(out, scalar)


@dataclass(frozen=True)
class ConjugatePair:
    """A divergence generator bundled with its conjugate and domain."""

    kind: DivergenceKind
    f: Callable
    f_star: Callable
    f_star_prime: Callable
    f_star_domain_sup: float


def conjugate_table(kind: DivergenceKind) -> ConjugatePair:
    """Closed-form conjugate data for one divergence kind."""
    return ConjugatePair(
        kind=kind,
        f=lambda t, _k=kind: f_value(_k, t),
        f_star=lambda s, _k=kind: conjugate(_k, s),
        f_star_prime=lambda s, _k=kind: conjugate_prime(_k, s),
        f_star_domain_sup=conjugate_domain_sup(kind),
    )
