"""End-to-end acceptance suite.

Each test covers one release criterion at its stated tolerance and
prints a PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).
"""

import json
import os
import time
from contextlib import contextmanager

import numpy as np
import pytest
from click.testing import CliRunner

from robust_kelly.ambiguity import Box, DivergenceBall, Singleton, WassersteinBall
from robust_kelly.cli import main as cli_main
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
    f_value,
)
from robust_kelly.duals import (
    maximize_dual_box,
    maximize_dual_divergence,
    maximize_dual_normball,
    maximize_dual_polyhedral,
    maximize_dual_wasserstein,
)
from robust_kelly.horserace import (
    CANONICAL_SEED,
    ball_family,
    box_family,
    make_instance,
    run_sweep,
)
from robust_kelly.market import Bet, BettingMarket, Distribution, log_growth
from robust_kelly.oracle import worst_case
from robust_kelly.solver import solve_drkp, solve_kelly

from support import (
    grid_min,
    random_ambiguity,
    random_interior_bet,
    random_market,
)
from test_divergences import numeric_conjugate, sample_in_domain


@contextmanager
def criterion(num, desc):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {num}: FAIL - {desc}")
        raise
    print(f"ACCEPTANCE {num}: PASS - {desc}")


def test_criterion_1_strong_duality_suite():
    with criterion(1, "strong duality, 200 random instances per variant, 1e-6"):
        t0 = time.time()
        rng = np.random.default_rng(101)
        plans = [
            ("polyhedral", lambda x, s, res: maximize_dual_polyhedral(x, s)[1]),
            ("box", lambda x, s, res: maximize_dual_box(x, s)[1]),
            ("normball", lambda x, s, res: maximize_dual_normball(x, s, starts=[res.certificate])[1]),
            ("divergence", lambda x, s, res: maximize_dual_divergence(x, s)[1]),
            ("wasserstein", lambda x, s, res: maximize_dual_wasserstein(x, s)[1]),
        ]
        worst_dev = 0.0
        for fam, dual_max in plans:
            for i in range(200):
                n, K = int(rng.integers(2, 7)), int(rng.integers(2, 11))
                market = random_market(rng, n, K)
                b = random_interior_bet(rng, n)
                x = market.log_payoffs(b)
                aset = random_ambiguity(rng, K, fam)
                res = worst_case(market, b, aset)
                dv = dual_max(x, aset, res)
                dev = abs(res.value - dv)
                worst_dev = max(worst_dev, dev)
                assert dev < 1e-6, (fam, i, res.value, dv)
        elapsed = time.time() - t0
        print(f"  worst primal-dual deviation {worst_dev:.2e}; {elapsed:.1f}s")
        assert elapsed < 60.0


def test_criterion_2_brute_force_grid_suite():
    with criterion(2, "grid brute force (pitch 1e-3) agreement 1e-4, K <= 4"):
        rng = np.random.default_rng(103)

        def check(market, b, aset):
            res = worst_case(market, b, aset)
            bf = grid_min(market.log_payoffs(b), aset, pitch=1e-3)
            assert res.value <= bf + 1e-9
            assert abs(bf - res.value) < 1e-4, (type(aset).__name__, bf, res.value)
            return abs(bf - res.value)

        mild3 = random_market(rng, 3, 3, lo=0.95, hi=1.06)
        b3 = random_interior_bet(rng, 3)

        # grid-aligned families: exact agreement expected
        from robust_kelly.ambiguity import ConvexHull, Polyhedral

        nom4 = Distribution([0.4, 0.3, 0.2, 0.1])
        box4 = Box(nom4, np.array([0.05, 0.1, 0.15, 0.05]))
        mild4 = random_market(rng, 3, 4, lo=0.95, hi=1.06)
        b4 = random_interior_bet(rng, 3)
        devs = {"box(K=4)": check(mild4, b4, box4)}

        devs["singleton"] = check(mild3, b3, Singleton(Distribution([0.5, 0.3, 0.2])))
        hull = ConvexHull(
            [Distribution([0.6, 0.2, 0.2]), Distribution([0.2, 0.6, 0.2]), Distribution([0.2, 0.2, 0.6])]
        )
        devs["hull"] = check(mild3, b3, hull)
        devs["polyhedral"] = check(
            mild3, b3, Box(Distribution([0.5, 0.3, 0.2]), np.array([0.1, 0.08, 0.12])).as_polyhedral()
        )

        from robust_kelly.ambiguity import NormBall

        nom3 = Distribution([0.45, 0.35, 0.2])
        devs["ball-cI"] = check(mild3, b3, NormBall(nom3, 0.08 * np.eye(3), 2.0))
        W = 0.1 * (np.eye(3) + np.array([[0.0, 0.2, -0.1], [0.1, 0.0, 0.15], [-0.05, 0.1, 0.0]]))
        devs["ball-W-p1.5"] = check(mild3, b3, NormBall(nom3, W, 1.5))
        devs["kl"] = check(mild3, b3, DivergenceBall(nom3, KL, 0.01))
        devs["tv"] = check(mild3, b3, DivergenceBall(nom3, TOTAL_VARIATION, 0.12))

        unit_cost = np.ones((3, 3)) - np.eye(3)
        devs["wasserstein-unit"] = check(mild3, b3, WassersteinBall(nom3, unit_cost, 0.05))
        cost = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])
        devs["wasserstein-graded"] = check(mild3, b3, WassersteinBall(nom3, cost, 0.06))
        print("  deviations: " + ", ".join(f"{k}={v:.1e}" for k, v in devs.items()))


def test_criterion_3_binary_kelly_closed_form():
    with criterion(3, "analytic binary Kelly b1 = max(2p-1, 0) within 1e-6"):
        market = BettingMarket(np.array([[2.0, 0.0], [1.0, 1.0]]))
        for p in (0.5, 0.55, 0.6, 0.75):
            rep = solve_kelly(market, Distribution([p, 1 - p]), tol=1e-9)
            assert abs(rep.b_star.alloc[0] - max(2 * p - 1, 0.0)) < 1e-6, p


def test_criterion_4_binary_robust_kelly_closed_form():
    with criterion(4, "analytic robust binary Kelly b1 = max(2(p-r)-1, 0) within 1e-5"):
        market = BettingMarket(np.array([[2.0, 0.0], [1.0, 1.0]]))
        for p, r in ((0.6, 0.1), (0.6, 0.05), (0.75, 0.1)):
            aset = Box(Distribution([p, 1 - p]), np.array([r, r]))
            rep = solve_drkp(market, aset, tol=1e-9)
            assert abs(rep.b_star.alloc[0] - max(2 * (p - r) - 1, 0.0)) < 1e-5, (p, r)


def test_criterion_5_degenerate_sets_match_kelly():
    with criterion(5, "degenerate ambiguity (point sets and 1e-9 limits) within 2e-6"):
        p = 0.51  # mild market: the sqrt(eps * variance) term stays tiny
        market = BettingMarket(np.array([[2.0, 0.0], [1.0, 1.0]]))
        nom = Distribution([p, 1 - p])
        kelly = solve_kelly(market, nom, tol=1e-9)
        cases = {
            "singleton": Singleton(nom),
            "box eta=0": box_family(nom, 0.0),
            "ball c=0": ball_family(nom, 0.0),
            "kl eps=1e-9": DivergenceBall(nom, KL, 1e-9),
            "wasserstein s=1e-9": WassersteinBall(nom, np.array([[0.0, 1.0], [1.0, 0.0]]), 1e-9),
        }
        for name, aset in cases.items():
            rep = solve_drkp(market, aset, tol=1e-9)
            assert abs(rep.value - kelly.value) < 2e-6, (name, rep.value, kelly.value)


def _pct(nats):
    return 100.0 * (np.exp(nats) - 1.0)


def test_criterion_6_horse_race_reproduction():
    with criterion(6, "horse race n=20: table sign structure and magnitudes within +/-50%"):
        t0 = time.time()
        inst = make_instance(20, CANONICAL_SEED)
        assert 0.10 <= inst.beta.max() <= 0.30
        assert 0.004 <= inst.beta.min() <= 0.03
        kelly = solve_kelly(inst.market, inst.pi_nom, tol=1e-6)
        box = box_family(inst.pi_nom, 0.26)
        ball = ball_family(inst.pi_nom, 0.016)
        rb_box = solve_drkp(inst.market, box, tol=1e-6)
        rb_ball = solve_drkp(inst.market, ball, tol=1e-6)
        wck_box = worst_case(inst.market, kelly.b_star, box).value
        g_nom = {
            "kelly": log_growth(inst.market, kelly.b_star, inst.pi_nom),
            "box": log_growth(inst.market, rb_box.b_star, inst.pi_nom),
        }
        # sign-and-ordering structure of the published tables
        assert g_nom["kelly"] > g_nom["box"] > 0.0
        assert wck_box < 0.0 < rb_box.value
        assert rb_box.value - wck_box >= 0.01  # nats
        # magnitudes within +/-50% of the published cells
        cells = {
            "nominal kelly": (_pct(g_nom["kelly"]), 4.3),
            "worst kelly (box)": (_pct(wck_box), -2.2),
            "nominal robust (box)": (_pct(g_nom["box"]), 2.2),
            "worst robust (box)": (_pct(rb_box.value), 0.7),
            "worst robust (ball)": (_pct(rb_ball.value), 0.4),
        }
        for name, (got, ref) in cells.items():
            lo, hi = sorted((0.5 * ref, 1.5 * ref))
            assert lo <= got <= hi, (name, got, ref)
        elapsed = time.time() - t0
        print(
            "  cells (%/round): "
            + ", ".join(f"{k}={v:.2f} (ref {r})" for k, (v, r) in cells.items())
            + f"; {elapsed:.0f}s"
        )
        assert elapsed < 300.0


def test_criterion_7_sweep_monotonicity():
    with criterion(7, "sweep curves: worst nonincreasing, kelly constant, robust dominates"):
        tol = 1e-6
        inst = make_instance(20, CANONICAL_SEED)
        for family, hi in (("box", 0.3), ("ball", 0.02)):
            sizes = np.linspace(0.0, hi, 11)
            sweep = run_sweep(inst, family, sizes, tol=tol)
            assert np.all(sweep.converged)
            assert np.ptp(sweep.nominal_kelly) == 0.0
            assert np.all(np.diff(sweep.worst_kelly) <= 2 * tol)
            assert np.all(np.diff(sweep.worst_robust) <= 2 * tol)
            assert np.all(sweep.worst_robust >= sweep.worst_kelly - 2 * tol)


def test_criterion_8_conjugate_property_suite():
    with criterion(8, "Fenchel-Young + numerical conjugates 1e-6; alpha limits 1e-4"):
        kinds = [KL, REVERSE_KL, PEARSON_CHI2, NEYMAN_CHI2, HELLINGER, TOTAL_VARIATION]
        kinds += [alpha_divergence(a) for a in (-1.0, 0.5, 2.0, 3.0)]
        rng = np.random.default_rng(107)
        for kind in kinds:
            ts = rng.uniform(0.0, 6.0, size=25)
            ss = sample_in_domain(kind, rng, 25)
            F = np.asarray(f_value(kind, ts))
            G = np.asarray(conjugate(kind, ss))
            assert np.all(F[:, None] + G[None, :] >= ts[:, None] * ss[None, :] - 1e-10)
            for s in sample_in_domain(kind, rng, 5):
                assert abs(conjugate(kind, float(s)) - numeric_conjugate(kind, float(s))) < 1e-6
        s = rng.uniform(-2.0, 0.8, size=25)
        for a, target in ((1 + 1e-6, KL), (1 - 1e-6, KL), (1e-6, REVERSE_KL), (-1e-6, REVERSE_KL)):
            got = np.asarray(conjugate(alpha_divergence(a), s))
            want = np.asarray(conjugate(target, s))
            assert np.max(np.abs(got - want)) < 1e-4


def test_criterion_9_certificate_soundness():
    with criterion(9, "1000 random feasible bets below value + gap"):
        rng = np.random.default_rng(109)
        families = ["box", "hull", "divergence", "normball_cI", "wasserstein", "polyhedral"]
        checked = 0
        while checked < 1000:
            fam = families[checked % len(families)]
            n, K = int(rng.integers(2, 6)), int(rng.integers(2, 7))
            market = random_market(rng, n, K)
            aset = random_ambiguity(rng, K, fam)
            rep = solve_drkp(market, aset, tol=1e-7)
            for _ in range(50):
                b = Bet(rng.dirichlet(np.ones(n)))
                val = worst_case(market, b, aset).value
                assert val <= rep.value + rep.gap + 1e-9, (fam, val, rep.value, rep.gap)
                checked += 1
        print(f"  checked {checked} bets")


def test_criterion_10_cli_round_trip_and_determinism(tmp_path):
    with criterion(10, "CLI determinism (byte-identical) and re-certification 10*tol"):
        # determinism of the horserace artifacts across identical runs
        args = [
            "horserace", "--n", "3", "--seed", "9", "--family", "box", "--sweep", "0,0.05,0.1",
        ]
        d1, d2 = str(tmp_path / "a"), str(tmp_path / "b")
        r1 = CliRunner().invoke(cli_main, args + ["--out-dir", d1])
        r2 = CliRunner().invoke(cli_main, args + ["--out-dir", d2])
        assert r1.exit_code == 0 and r2.exit_code == 0
        for name in ("instance.json", "sweep.csv"):
            b1 = open(os.path.join(d1, name), "rb").read()
            assert b1 == open(os.path.join(d2, name), "rb").read()
        for name in sorted(os.listdir(d1)):
            if not name.startswith("result_"):
                continue
            docs = []
            for d in (d1, d2):
                with open(os.path.join(d, name)) as fh:
                    doc = json.load(fh)
                doc["diagnostics"].pop("wall_time_ms")  # wall-clock, see ledger
                docs.append(json.dumps(doc, sort_keys=True))
            assert docs[0] == docs[1], name

        # solve -> worst-case round trip within 10 * tol
        tol = 1e-8
        prob = {
            "returns": [[2.0, 0.0], [1.0, 1.0]],
            "ambiguity": {"type": "box", "pi_nom": [0.6, 0.4], "rho": [0.05, 0.05]},
            "tolerance": tol,
        }
        ppath = str(tmp_path / "p.json")
        with open(ppath, "w") as fh:
            json.dump(prob, fh)
        out = str(tmp_path / "res.json")
        r = CliRunner().invoke(cli_main, ["solve", ppath, "--robust", "--out", out])
        assert r.exit_code == 0, r.output
        wc_out = str(tmp_path / "wc.json")
        r = CliRunner().invoke(cli_main, ["worst-case", ppath, "--bet", out, "--out", wc_out])
        assert r.exit_code == 0, r.output
        solved = json.load(open(out))
        recert = json.load(open(wc_out))
        assert abs(solved["worst_case_growth"] - recert["worst_case_growth"]) <= 10 * tol
        assert recert["worst_case_growth_pct"] == pytest.approx(
            100 * (np.exp(recert["worst_case_growth"]) - 1.0), abs=1e-12
        )
