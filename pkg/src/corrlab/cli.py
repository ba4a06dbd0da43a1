"""Command-line front end.

Every command prints one JSON object ``{"command", "parameters", "outputs",
"ok"}`` to stdout (``decohere --csv`` prints CSV instead). Exit status is 0
when all internal validations pass, 1 when one fails and 2 for malformed
input or out-of-range parameters.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_INVALID, EXIT_MALFORMED = 0, 1, 2


class MalformedInput(Exception):
    pass


def _prob(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 0.5:
        raise argparse.ArgumentTypeError(f"p must lie in [0, 1/2], got {v}")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {v}")
    return v


def _load_box(path: str):
    from .boxes import CorrelationBox

    try:
        return CorrelationBox.from_json(Path(path).read_text())
    except OSError as e:
        raise MalformedInput(f"cannot read {path}: {e}") from e
    except (ValueError, KeyError, TypeError) as e:
        raise MalformedInput(f"{path}: not a valid box: {e}") from e


# --- handlers: each returns (outputs, ok) ------------------------------------


def _box_check(args):
    from .boxes import check_no_signaling

    rep = check_no_signaling(_load_box(args.file))
    return {"is_no_signaling": rep.is_no_signaling, "max_violation": rep.max_violation,
            "worst_case": rep.worst_case}, rep.is_no_signaling


def _box_chsh(args):
    from .boxes import chsh_value

    box = _load_box(args.file)
    try:
        return {"K": chsh_value(box)}, True
    except ValueError as e:
        raise MalformedInput(str(e)) from e


def _game_table(args):
    from .boxes import build_game_table

    return json.loads(build_game_table(args.p).to_json()), True


def _game_play(args):
    from .boxes import p_game, win_probability
    from .runner import classical_strategy, empirical_no_signaling, play, pr_strategy, quantum_strategy

    strategy = {"classical": lambda: classical_strategy(args.p),
                "quantum": lambda: quantum_strategy("min"),
                "pr": lambda: pr_strategy(args.p)}[args.strategy]()
    game = p_game(args.p)
    report = play(game, strategy, args.rounds, args.seed, workers=args.workers)
    verdict = empirical_no_signaling(report, args.alpha)
    out = report.to_dict()
    out["expected_win_probability"] = win_probability(strategy.box(), game)
    out["no_signaling_test"] = {"status": verdict.status, "min_p_value": verdict.min_p_value,
                                "tests": verdict.tests}
    return out, verdict.status != "reject"


def _game_sweep(args):
    from .runner import sweep_p

    grid = args.grid if args.grid else list(np.linspace(0.0, 0.5, 11))
    for p in grid:
        if not 0.0 <= p <= 0.5:
            raise MalformedInput(f"grid value {p} outside [0, 1/2]")
    if args.rounds and args.seed is None:
        raise MalformedInput("--rounds requires --seed")
    rows = []
    for fam in args.family:
        rows.extend(sweep_p(fam, grid, args.rounds, args.seed or 0))
    return {"rows": rows}, True


def _polytope_membership(args):
    from .local import membership

    return membership(_load_box(args.file)).to_dict(), True


def _quantum_optimize(args):
    from .boxes import p_game, win_probability
    from .hilbert import measurement_to_json, optimize_chsh, quantum_box, state_to_json

    opt = optimize_chsh(args.objective)
    box = quantum_box(opt.strategy)
    return {
        "K": opt.K,
        "angles": list(opt.angles),
        "win_probability_p_half": win_probability(box, p_game(0.5)),
        "state": json.loads(state_to_json(opt.strategy.state, opt.strategy.dims)),
        "alice": [json.loads(measurement_to_json(M)) for M in opt.strategy.alice_settings],
        "bob": [json.loads(measurement_to_json(M)) for M in opt.strategy.bob_settings],
        "box": json.loads(box.to_json()),
    }, True


def _steer_demo(args):
    from .scenarios import build_steering_example, steering_no_signaling_check

    ex = build_steering_example()
    g, h = ex.plane_vectors()
    plane = np.outer(g, g.conj()) + np.outer(h, h.conj())
    report = steering_no_signaling_check(ex)
    report["expansion_difference"] = float(np.linalg.norm(ex.expansion(1) - ex.expansion(2)))
    report["rho_B_deviation_from_I/2"] = float(np.abs(ex.rho_B().matrix - np.eye(2) / 2).max())
    report["rho_A_deviation_from_plane/2"] = float(np.abs(ex.rho_A().matrix - plane / 2).max())
    ok = (report["no_signaling"] and report["expansion_difference"] < 1e-10
          and report["rho_B_deviation_from_I/2"] < 1e-10 and report["rho_A_deviation_from_plane/2"] < 1e-10)
    return report, ok


def _clone_advantage(args):
    from .scenarios import cloning_signaling_advantage

    recs = [cloning_signaling_advantage(n) for n in range(1, args.n + 1)]
    return {"records": [r.__dict__ for r in recs]}, True


def _clone_pr_signal(args):
    from .scenarios import pr_clone_signal

    rec = pr_clone_signal(args.rounds, args.seed, cloned=not args.no_clone)
    return rec.__dict__, (rec.identity_holds if rec.cloned else True)


def _tomography(args):
    from .scenarios import from_bloch, tomography_information_loss

    r = np.asarray(args.bloch, dtype=float)
    if np.linalg.norm(r) > 1.0 + 1e-12:
        raise MalformedInput(f"Bloch vector {r.tolist()} lies outside the unit ball")
    rec = tomography_information_loss(from_bloch(r), args.shots, args.seed)
    return json.loads(rec.to_json()), True


def _decohere(args):
    from .decoherence import DecoherenceModel, evolve_snapshot, time_series

    model = DecoherenceModel.random(K=args.branches, V=args.modes, seed=args.seed)
    times = np.linspace(0.0, args.tmax, args.steps + 1)
    rows = time_series(model, times)
    pops0 = evolve_snapshot(model, 0.0).pointer_populations()
    popsT = evolve_snapshot(model, args.tmax).pointer_populations()
    ok = bool(np.abs(pops0 - popsT).max() <= 1e-12)
    return {"rows": rows, "populations": popsT.tolist()}, ok


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="corrlab", description="Nonlocal correlations toolkit.")
    sub = ap.add_subparsers(dest="group", required=True)

    box = sub.add_parser("box", help="inspect a correlation box file").add_subparsers(dest="cmd", required=True)
    for name, fn, help_ in (("check", _box_check, "no-signaling report"), ("chsh", _box_chsh, "CHSH value K")):
        sp = box.add_parser(name, help=help_)
        sp.add_argument("file")
        sp.set_defaults(func=fn)

    game = sub.add_parser("game", help="the p-game").add_subparsers(dest="cmd", required=True)
    sp = game.add_parser("table", help="the winning box for a given p")
    sp.add_argument("--p", type=_prob, required=True)
    sp.set_defaults(func=_game_table)
    sp = game.add_parser("play", help="Monte Carlo play")
    sp.add_argument("--p", type=_prob, required=True)
    sp.add_argument("--strategy", choices=["classical", "quantum", "pr"], required=True)
    sp.add_argument("--rounds", type=_positive, required=True)
    sp.add_argument("--seed", type=_nonneg_int, required=True)
    sp.add_argument("--alpha", type=float, default=0.01)
    sp.add_argument("--workers", type=_positive, default=1)
    sp.set_defaults(func=_game_play)
    sp = game.add_parser("sweep", help="best win probability against p")
    sp.add_argument("--grid", type=float, nargs="+")
    sp.add_argument("--family", choices=["classical", "quantum", "pr"], nargs="+",
                    default=["classical", "quantum", "pr"])
    sp.add_argument("--rounds", type=_nonneg_int, default=0)
    sp.add_argument("--seed", type=_nonneg_int)
    sp.set_defaults(func=_game_sweep)

    poly = sub.add_parser("polytope", help="local polytope").add_subparsers(dest="cmd", required=True)
    sp = poly.add_parser("membership", help="local decomposition or nonlocal verdict")
    sp.add_argument("file")
    sp.set_defaults(func=_polytope_membership)

    q = sub.add_parser("quantum", help="quantum CHSH strategies").add_subparsers(dest="cmd", required=True)
    sp = q.add_parser("optimize", help="extreme CHSH value over qubit measurements")
    sp.add_argument("--objective", choices=["max", "min"], default="max")
    sp.set_defaults(func=_quantum_optimize)

    st = sub.add_parser("steer", help="steering example").add_subparsers(dest="cmd", required=True)
    st.add_parser("demo").set_defaults(func=_steer_demo)

    cl = sub.add_parser("clone", help="cloning would enable signaling").add_subparsers(dest="cmd", required=True)
    sp = cl.add_parser("advantage", help="Helstrom success for 1..n clones")
    sp.add_argument("--n", type=_positive, required=True)
    sp.set_defaults(func=_clone_advantage)
    sp = cl.add_parser("pr-signal", help="Bob infers x from a cloned PR box")
    sp.add_argument("--rounds", type=_positive, default=10_000)
    sp.add_argument("--seed", type=_nonneg_int, required=True)
    sp.add_argument("--no-clone", action="store_true")
    sp.set_defaults(func=_clone_pr_signal)

    sp = sub.add_parser("tomography", help="Pauli tomography of a qubit")
    sp.add_argument("--shots", type=_positive, required=True)
    sp.add_argument("--seed", type=_nonneg_int, required=True)
    sp.add_argument("--bloch", type=float, nargs=3, default=[0.0, 0.0, 1.0])
    sp.set_defaults(func=_tomography)

    sp = sub.add_parser("decohere", help="decoherence time series")
    sp.add_argument("--modes", type=_positive, required=True)
    sp.add_argument("--branches", type=_positive, default=2)
    sp.add_argument("--tmax", type=_positive_float, required=True)
    sp.add_argument("--steps", type=_positive, default=200)
    sp.add_argument("--seed", type=_nonneg_int, required=True)
    sp.add_argument("--csv", action="store_true")
    sp.set_defaults(func=_decohere)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on bad flags
    params = {k: v for k, v in vars(args).items() if k not in ("func", "group", "cmd")}
    command = " ".join(x for x in (args.group, getattr(args, "cmd", None)) if x)
    try:
        outputs, ok = args.func(args)
    except MalformedInput as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MALFORMED
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MALFORMED
    if getattr(args, "csv", False):
        from .decoherence import time_series_csv

        sys.stdout.write(time_series_csv(outputs["rows"]))
    else:
        print(json.dumps({"command": command, "parameters": params, "outputs": outputs, "ok": ok},
                         default=_json_default))
    return EXIT_OK if ok else EXIT_INVALID


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serialisable: {type(o).__name__}")


if __name__ == "__main__":
    sys.exit(main())
