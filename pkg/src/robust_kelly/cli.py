"""Command-line interface: solve, worst-case, horserace.

Exit codes: 0 on a certified result, 1 on invalid input, 2 when the
iteration budget ran out before reaching the tolerance (the result file
is still written, with its honest gap).
"""

import json
import os
import sys

import click
import numpy as np

from .ambiguity import Singleton
from .errors import ValidationError
from .horserace import (
    CANONICAL_SEED,
    box_family,
    ball_family,
    make_instance,
    run_sweep,
)
from .io import growth_pct, load_problem, result_payload, write_json_atomic, write_text_atomic
from .market import Bet, Distribution, log_growth
from .oracle import worst_case
from .solver import certify, solve_drkp, solve_kelly

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NOT_CONVERGED = 2


@click.group()
def main():
    """Kelly betting and its distributionally robust variant."""


def _fail(msg: str) -> None:
    click.echo(f"error: {msg}", err=True)
    sys.exit(EXIT_INVALID)


def _nominal_of(aset) -> Distribution:
    nom = getattr(aset, "pi_nom", None)
    if nom is None:
        raise ValidationError(
            f"--nominal needs an ambiguity set with a nominal distribution; "
            f"{type(aset).__name__} has none"
        )
    return nom


@main.command("solve")
@click.argument("problem_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--robust/--nominal", default=True, help="Worst-case or nominal objective.")
@click.option("--tol", type=float, default=None, help="Gap tolerance [default: problem file value or 1e-6].")
@click.option("--max-iter", type=int, default=10000, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Result file path.")
def cmd_solve(problem_path, robust, tol, max_iter, out):
    """Solve the (robust) Kelly problem described by a problem file."""
    try:
        market, aset, file_tol = load_problem(problem_path)
        if tol is None:
            tol = file_tol if file_tol is not None else 1e-6
        if robust:
            rep = solve_drkp(market, aset, tol=tol, max_iter=max_iter)
        else:
            rep = solve_kelly(market, _nominal_of(aset), tol=tol, max_iter=max_iter)
    except ValidationError as e:
        _fail(str(e))
    payload = result_payload(
        rep.b_star,
        rep.value,
        rep.gap,
        rep.worst_case.pi_star,
        rep.iterations,
        rep.wall_time,
        rep.oracle_calls,
    )
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        write_json_atomic(out, payload)
    else:
        click.echo(text)
    if not rep.converged:
        click.echo(f"warning: tolerance {tol} not reached (gap {rep.gap:.3e})", err=True)
        sys.exit(EXIT_NOT_CONVERGED)
    sys.exit(EXIT_OK)


def _parse_bet(spec: str, n: int) -> Bet:
    """Accept an inline JSON array, a result file, or a bare-array file."""
    if os.path.exists(spec):
        with open(spec) as fh:
            doc = json.load(fh)
        arr = doc["bet"] if isinstance(doc, dict) else doc
    else:
        try:
            arr = json.loads(spec)
        except json.JSONDecodeError:
            raise ValidationError(f"--bet is neither a file nor inline JSON: {spec!r}")
    arr = np.asarray(arr, dtype=np.float64)
    if arr.shape != (n,):
        raise ValidationError(f"bet has shape {arr.shape}, expected ({n},)")
    return Bet(arr)


@main.command("worst-case")
@click.argument("problem_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--bet", "bet_spec", required=True, help="Inline JSON array or path to a result file.")
@click.option("--tol", type=float, default=None, help="Gap tolerance [default: problem file value or 1e-6].")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def cmd_worst_case(problem_path, bet_spec, tol, out):
    """Worst-case growth of a given bet over the problem's ambiguity set."""
    try:
        market, aset, file_tol = load_problem(problem_path)
        if tol is None:
            tol = file_tol if file_tol is not None else 1e-6
        bet = _parse_bet(bet_spec, market.n)
        if not market.bet_constraints.contains(bet):
            raise ValidationError("bet violates the problem's bet constraints")
        wc = worst_case(market, bet, aset)
        value, gap = certify(market, aset, bet, tol)
    except ValidationError as e:
        _fail(str(e))
    payload = result_payload(bet, value, gap, wc.pi_star, 0, 0.0, 1)
    if out:
        write_json_atomic(out, payload)
    else:
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
    sys.exit(EXIT_OK)


@main.command("horserace")
@click.option("--n", type=int, default=20, show_default=True, help="Number of horses.")
@click.option("--seed", type=int, default=CANONICAL_SEED, show_default=True)
@click.option("--family", type=click.Choice(["box", "ball"]), default="box", show_default=True)
@click.option("--size", type=float, default=None, help="Single uncertainty size (eta or c).")
@click.option("--sweep", "sweep_csv", type=str, default=None, help="Comma-separated sizes.")
@click.option("--tol", type=float, default=1e-6, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
def cmd_horserace(n, seed, family, size, sweep_csv, tol, out_dir):
    """Generate the place-bet horse race and run the experiment."""
    if (size is None) == (sweep_csv is None):
        _fail("give exactly one of --size or --sweep")
    try:
        if n < 2:
            raise ValidationError("need at least two horses")
        inst = make_instance(n, seed)
    except ValidationError as e:
        _fail(str(e))
    os.makedirs(out_dir, exist_ok=True)
    write_json_atomic(
        os.path.join(out_dir, "instance.json"),
        {
            "n": n,
            "seed": seed,
            "beta": [float(v) for v in inst.beta],
            "returns": [[float(v) for v in row] for row in inst.market.R],
            "pi_nom": [float(v) for v in inst.pi_nom.probs],
            "outcome_pairs": [[j, k] for j, k in inst.pairs],
        },
    )
    family_fn = box_family if family == "box" else ball_family
    sizes = [size] if size is not None else [float(s) for s in sweep_csv.split(",")]
    try:
        sizes = sorted(sizes)
        sweep = run_sweep(inst, family, sizes, tol)
    except ValidationError as e:
        _fail(str(e))

    kelly = sweep.kelly_report
    write_json_atomic(
        os.path.join(out_dir, "result_kelly.json"),
        result_payload(
            kelly.b_star,
            kelly.value,
            kelly.gap,
            kelly.worst_case.pi_star,
            kelly.iterations,
            kelly.wall_time,
            kelly.oracle_calls,
        ),
    )
    for s, rep in zip(sweep.sizes, sweep.robust_reports):
        write_json_atomic(
            os.path.join(out_dir, f"result_robust_{family}_{s:g}.json"),
            result_payload(
                rep.b_star,
                rep.value,
                rep.gap,
                rep.worst_case.pi_star,
                rep.iterations,
                rep.wall_time,
                rep.oracle_calls,
            ),
        )

    if size is not None:
        aset = family_fn(inst.pi_nom, size)
        rep = sweep.robust_reports[0]
        wck = worst_case(inst.market, kelly.b_star, aset)
        g_nom_rk = log_growth(inst.market, rep.b_star, inst.pi_nom)
        rows = [
            ("kelly", "nominal", kelly.value),
            ("kelly", "worst_case", wck.value),
            ("robust", "nominal", g_nom_rk),
            ("robust", "worst_case", rep.value),
        ]
        lines = ["bet,distribution,growth_nats,growth_pct"]
        lines += [f"{b},{d},{v:.12g},{growth_pct(v):.12g}" for b, d, v in rows]
        write_text_atomic(os.path.join(out_dir, "table.csv"), "\n".join(lines) + "\n")
    else:
        lines = ["size,nominal_kelly,worst_kelly,nominal_robust,worst_robust"]
        for i, s in enumerate(sweep.sizes):
            lines.append(
                f"{s:.12g},{sweep.nominal_kelly[i]:.12g},{sweep.worst_kelly[i]:.12g},"
                f"{sweep.nominal_robust[i]:.12g},{sweep.worst_robust[i]:.12g}"
            )
        write_text_atomic(os.path.join(out_dir, "sweep.csv"), "\n".join(lines) + "\n")

    if not all(sweep.converged):
        bad = [f"{s:g}" for s, ok in zip(sweep.sizes, sweep.converged) if not ok]
        click.echo(f"warning: tolerance not reached at sizes: {', '.join(bad)}", err=True)
        sys.exit(EXIT_NOT_CONVERGED)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
