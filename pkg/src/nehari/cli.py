"""Command-line front end.

    nehari {solve,sweep,classify,constants,verify} --config CFG --out DIR [--seed N]

Every subcommand writes its artifacts into DIR and echoes the materialized
config there.  Failures exit nonzero and leave ``error.json`` behind.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from pathlib import Path

from . import verification
from .config import parse_config, with_seed
from .energy import integral_triple
from .fibering import NehariClass, classify_and_roots
from .grid import write_field
from .solver import default_initializer, lambda_sweep, solve_dual
from .thresholds import compute_thresholds

SCHEMA = 1
SWEEP_HEADER = ["lambda", "J_plus", "J_minus", "conv_plus", "conv_minus", "separation"]


def _dump_json(path: Path, payload: dict) -> str:
    text = json.dumps({"schema": SCHEMA, **payload}, indent=2, allow_nan=True) + "\n"
    path.write_text(text)
    return text


def _setup(cfg):
    grid = cfg.grid
    weights = cfg.weights()
    th = compute_thresholds(grid, weights, cfg.q, cfg.alpha, cfg.beta, seed=cfg.seed)
    return grid, weights, th


def cmd_constants(cfg, out: Path) -> int:
    _, _, th = _setup(cfg)
    params = cfg.params(th.lambda1)
    payload = {
        "S_q": th.S_q,
        "S_pq": th.S_pq,
        "delta": th.delta,
        "c": th.c,
        "lambda1": th.lambda1,
        "lambda": params.lam,
        "delta1": th.delta1(params.lam),
        "a_sup": th.a_sup,
        "b_plus_sup": th.b_plus_sup,
        "seed": th.seed,
    }
    print(_dump_json(out / "constants.json", payload), end="")
    return 0


def cmd_classify(cfg, out: Path) -> int:
    grid, weights, th = _setup(cfg)
    params = cfg.params(th.lambda1)
    payload = {"lambda": params.lam}
    for branch in (NehariClass.PLUS, NehariClass.MINUS):
        init = default_initializer(grid, weights, params, branch)
        triple = integral_triple(grid, weights, params, init)
        payload[f"{branch.value}_initializer"] = {
            "triple": dict(triple._asdict()),
            "geometry": classify_and_roots(triple, params).to_dict(),
        }
    print(_dump_json(out / "classify.json", payload), end="")
    return 0


def cmd_solve(cfg, out: Path) -> int:
    grid, weights, th = _setup(cfg)
    params = cfg.params(th.lambda1)
    sol = solve_dual(grid, weights, params, cfg.solve_options(), th)
    for name, rep in (("plus", sol.plus), ("minus", sol.minus)):
        if rep is not None:
            write_field(out / f"{name}_u.txt", grid, rep.state.u)
            write_field(out / f"{name}_v.txt", grid, rep.state.v)
    summary = sol.summary()
    summary["delta1"] = th.delta1(params.lam)
    print(_dump_json(out / "summary.json", summary), end="")
    return 0 if sol.positive else 1


def cmd_sweep(cfg, out: Path) -> int:
    grid, weights, th = _setup(cfg)
    params = cfg.params(th.lambda1)
    lambdas = [f * th.lambda1 for f in cfg.sweep_fractions]
    rows = lambda_sweep(grid, weights, params, lambdas, cfg.solve_options(), th)
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for row in rows:
            writer.writerow([repr(row.lam), repr(row.J_plus), repr(row.J_minus),
                             int(row.conv_plus), int(row.conv_minus), repr(row.separation)])
    print((out / "sweep.csv").read_text(), end="")
    return 0 if all(r.conv_plus and r.conv_minus for r in rows) else 1


def cmd_verify(cfg, out: Path) -> int:
    results = verification.run_all(seed=cfg.seed)
    payload = {
        "seed": cfg.seed,
        "failed_invariants": sum(r.failed > 0 for r in results),
        "suites": [r.to_dict() for r in results],
    }
    print(_dump_json(out / "verify.json", payload), end="")
    return 0 if payload["failed_invariants"] == 0 else 1


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "classify": cmd_classify,
    "constants": cmd_constants,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nehari", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="flat key = value config file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg = with_seed(cfg, args.seed)
        (out / "config_echo.txt").write_text(cfg.echo())
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            status = COMMANDS[args.command](cfg, out)
        for w in caught:
            logging.warning("%s", w.message)
        return status
    except Exception as exc:  # reported as machine-readable JSON
        _dump_json(out / "error.json", {"command": args.command, "error": type(exc).__name__, "message": str(exc)})
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
