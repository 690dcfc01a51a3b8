"""Problem and result file formats (JSON), schema-checked on load.

A problem file carries the market, optional bet constraints, one
ambiguity-set description, and an optional tolerance.  A result file
carries the bet, the certified worst-case growth in nats/round and as a
percent growth factor, the certificate gap, the worst-case distribution,
and solve diagnostics.  Unknown keys are rejected with the JSON path of
the offender; writes are atomic (temp file + rename).
"""

import json
import os
import tempfile
from typing import Optional, Tuple

import numpy as np
from jsonschema import Draft202012Validator

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
from .divergences import (
    HELLINGER,
    KL,
    NEYMAN_CHI2,
    PEARSON_CHI2,
    REVERSE_KL,
    TOTAL_VARIATION,
    DivergenceKind,
    alpha_divergence,
)
from .errors import ValidationError
from .market import Bet, BetConstraintSet, BettingMarket, Distribution

__all__ = [
    "load_problem",
    "parse_problem",
    "result_payload",
    "write_json_atomic",
    "write_text_atomic",
    "PROBLEM_SCHEMA",
]

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}
_MAT = {"type": "array", "items": _VEC, "minItems": 1}

_AMBIGUITY_VARIANTS = {
    "singleton": {"required": ["pi_nom"], "properties": {"pi_nom": _VEC}},
    "convex_hull": {"required": ["vertices"], "properties": {"vertices": _MAT}},
    "polyhedral": {
        "required": [],
        "properties": {"A0": _MAT, "d0": _VEC, "A1": _MAT, "d1": _VEC},
    },
    "box": {"required": ["pi_nom", "rho"], "properties": {"pi_nom": _VEC, "rho": _VEC}},
    "norm_ball": {
        "required": ["pi_nom", "W", "p"],
        "properties": {"pi_nom": _VEC, "W": _MAT, "p": {"anyOf": [_NUM, {"const": "inf"}]}},
    },
    "divergence": {
        "required": ["pi_nom", "kind", "epsilon"],
        "properties": {
            "pi_nom": _VEC,
            "kind": {
                "enum": [
                    "kl",
                    "reverse_kl",
                    "pearson_chi2",
                    "neyman_chi2",
                    "hellinger",
                    "total_variation",
                    "alpha",
                ]
            },
            "alpha": _NUM,
            "epsilon": _NUM,
        },
    },
    "wasserstein": {
        "required": ["pi_nom", "cost", "s"],
        "properties": {"pi_nom": _VEC, "cost": _MAT, "s": _NUM},
    },
}

PROBLEM_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["returns", "ambiguity"],
    "properties": {
        "returns": _MAT,
        "bet_constraints": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "lower": _VEC,
                "upper": _VEC,
                "linear_ineq": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["F", "g"],
                    "properties": {"F": _MAT, "g": _VEC},
                },
            },
        },
        "ambiguity": {
            "type": "object",
            "required": ["type"],
            "properties": {"type": {"enum": sorted(_AMBIGUITY_VARIANTS)}},
            "allOf": [
                {
                    "if": {"properties": {"type": {"const": name}}, "required": ["type"]},
                    "then": {
                        "additionalProperties": False,
                        "required": ["type"] + spec["required"],
                        "properties": {"type": {"const": name}, **spec["properties"]},
                    },
                }
                for name, spec in _AMBIGUITY_VARIANTS.items()
            ],
        },
        "tolerance": _NUM,
    },
}

_validator = Draft202012Validator(PROBLEM_SCHEMA)

_NAMED_KINDS = {
    "kl": KL,
    "reverse_kl": REVERSE_KL,
    "pearson_chi2": PEARSON_CHI2,
    "neyman_chi2": NEYMAN_CHI2,
    "hellinger": HELLINGER,
    "total_variation": TOTAL_VARIATION,
}


def _schema_check(doc: dict) -> None:
    errors = sorted(_validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), str(e.absolute_path)))
    if errors:
        err = errors[-1]
        path = "$" + "".join(
            f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path
        )
        raise ValidationError(f"invalid problem file at {path}: {err.message}")


def parse_ambiguity(doc: dict) -> AmbiguitySet:
    kind = doc["type"]
    if kind == "singleton":
        return Singleton(Distribution(np.asarray(doc["pi_nom"])))
    if kind == "convex_hull":
        return ConvexHull([Distribution(np.asarray(v)) for v in doc["vertices"]])
    if kind == "polyhedral":
        mats = {k: (np.asarray(doc[k]) if k in doc else None) for k in ("A0", "d0", "A1", "d1")}
        K = None
        for m in ("A0", "A1"):
            if mats[m] is not None:
                K = np.atleast_2d(mats[m]).shape[1]
        if K is None:
            raise ValidationError("polyhedral ambiguity needs A0/d0 or A1/d1")
        return Polyhedral(K=K, **mats)
    nom = Distribution(np.asarray(doc["pi_nom"]))
    if kind == "box":
        return Box(nom, np.asarray(doc["rho"], dtype=np.float64))
    if kind == "norm_ball":
        p = np.inf if doc["p"] == "inf" else float(doc["p"])
        return NormBall(nom, np.asarray(doc["W"], dtype=np.float64), p)
    if kind == "divergence":
        if doc["kind"] == "alpha":
            if "alpha" not in doc:
                raise ValidationError("divergence kind 'alpha' needs an 'alpha' value")
            dk: DivergenceKind = alpha_divergence(float(doc["alpha"]))
        else:
            dk = _NAMED_KINDS[doc["kind"]]
        return DivergenceBall(nom, dk, float(doc["epsilon"]))
    if kind == "wasserstein":
        return WassersteinBall(nom, np.asarray(doc["cost"], dtype=np.float64), float(doc["s"]))
    raise ValidationError(f"unknown ambiguity type {kind!r}")  # pragma: no cover


def parse_problem(doc: dict) -> Tuple[BettingMarket, AmbiguitySet, Optional[float]]:
    _schema_check(doc)
    R = np.asarray(doc["returns"], dtype=np.float64)
    bc_doc = doc.get("bet_constraints", {})
    linear = None
    if "linear_ineq" in bc_doc:
        linear = (
            np.asarray(bc_doc["linear_ineq"]["F"], dtype=np.float64),
            np.asarray(bc_doc["linear_ineq"]["g"], dtype=np.float64),
        )
    constraints = BetConstraintSet(
        n=R.shape[0],
        lower=np.asarray(bc_doc["lower"], dtype=np.float64) if "lower" in bc_doc else None,
        upper=np.asarray(bc_doc["upper"], dtype=np.float64) if "upper" in bc_doc else None,
        linear_ineq=linear,
    )
    market = BettingMarket(R, constraints)
    aset = parse_ambiguity(doc["ambiguity"])
    if aset.K != market.K:
        raise ValidationError(
            f"ambiguity set dimension {aset.K} does not match the market's {market.K} outcomes"
        )
    tol = float(doc["tolerance"]) if "tolerance" in doc else None
    return market, aset, tol


def load_problem(path: str) -> Tuple[BettingMarket, AmbiguitySet, Optional[float]]:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValidationError(f"not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ValidationError("problem file must be a JSON object")
    return parse_problem(doc)


def growth_pct(nats: float) -> float:
    """Percent growth factor per round: 100 (exp(g) - 1)."""
    return 100.0 * (np.exp(nats) - 1.0)


def result_payload(
    bet: Bet,
    value: float,
    gap: float,
    pi_star: Distribution,
    iterations: int,
    wall_time_s: float,
    oracle_calls: int,
) -> dict:
    return {
        "bet": [float(v) for v in bet.alloc],
        "worst_case_growth": float(value),
        "worst_case_growth_pct": float(growth_pct(value)),
        "gap": float(gap),
        "worst_case_distribution": [float(v) for v in pi_star.probs],
        "diagnostics": {
            "iterations": int(iterations),
            "wall_time_ms": float(1000.0 * wall_time_s),
            "oracle_calls": int(oracle_calls),
        },
    }


def write_json_atomic(path: str, payload: dict) -> None:
    write_text_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_text_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
