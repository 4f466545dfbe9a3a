"""Command-line front end.

Every subcommand reads an experiment config (the shipped defaults
unless ``--config`` is given), applies the flag overrides, runs, writes its
data files and prints one summary line. Output files depend only on the
resolved config, so ``--workers`` never changes them.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from functools import partial
from pathlib import Path

import numpy as np

from .channel import scenario_to_dict
from .config import ConfigError, ExperimentConfig, config_to_dict, default_config, load_config
from .harness import (
    realization_scenario,
    run_beampattern,
    run_monte_carlo,
    run_tradeoff_sweep,
    summarize,
    write_beampattern,
    write_tradeoff,
)
from .metrics import WeightPair, crb_closed, sensing_objective, sum_rate
from .optimizer import rotation_search

log = logging.getLogger("ra_isac")

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
DEFAULT_OUTPUTS = {
    "solve": "results/solve.json",
    "rotation-search": "results/rotation_search.csv",
    "beampattern": "results/beampattern.csv",
    "montecarlo": "results/montecarlo.json",
}
DEFAULT_COMM_WEIGHT = 0.5  # single-weight commands without --omega1


def _beams_to_list(beams) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(beams)]


def _write_json(path: Path, doc: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1) + "\n")
    return path


def resolve_config(args) -> ExperimentConfig:
    """Load the config file (or the shipped default) and apply flag overrides."""
    if args.config:
        config = load_config(args.config)
    else:
        config = default_config("beampattern" if args.command == "beampattern" else "default")
    overrides = {"seed": args.seed, "grid_points": args.grid_points, "monte_carlo_runs": args.mc_runs}
    if args.output is not None:
        overrides["output_path"] = args.output
    elif args.command in DEFAULT_OUTPUTS:
        overrides["output_path"] = DEFAULT_OUTPUTS[args.command]
    if args.omega1 is not None:
        try:
            overrides["weight_grid"] = (WeightPair.from_comm(args.omega1),)
        except ValueError as exc:
            raise ConfigError(f"--omega1: {exc}") from None
    try:
        return config.with_overrides(**overrides)
    except ValueError as exc:
        flags = ", ".join(f"--{k.replace('_', '-')}" for k, v in overrides.items() if v is not None)
        raise ConfigError(f"overrides ({flags}): {exc}") from None


def _single_weight(config: ExperimentConfig, args) -> WeightPair:
    if args.omega1 is not None:
        return config.weight_grid[0]
    return WeightPair.from_comm(DEFAULT_COMM_WEIGHT)


def _solve_record(config, weights, index, result) -> dict:
    scenario = realization_scenario(config, index)
    crb = crb_closed(result.best_solution, scenario, result.best_rotation)
    return {
        "realization": index,
        "comm_weight": weights.comm_weight,
        "sense_weight": weights.sense_weight,
        "rotation": result.best_rotation,
        "objective": result.best_objective,
        "sum_rate": sum_rate(scenario, result.best_solution.beams, result.best_rotation),
        "sensing": sensing_objective(result.best_solution, scenario, result.best_rotation),
        "crb": crb.value,
        "degenerate": crb.degenerate,
        "converged": result.converged,
    }


def cmd_solve(config, args):
    weights = _single_weight(config, args)
    scenario = realization_scenario(config, 0)
    result = rotation_search(scenario, weights, config.options, config.grid_points)
    record = _solve_record(config, weights, 0, result)
    doc = {
        "config": config_to_dict(config),
        "scenario": scenario_to_dict(scenario),
        "result": record,
        "beams": _beams_to_list(result.best_solution.beams),
    }
    _write_json(Path(config.output_path), doc)
    return record["objective"], record["rotation"]


def cmd_rotation_search(config, args):
    weights = _single_weight(config, args)
    scenario = realization_scenario(config, 0)
    result = rotation_search(scenario, weights, config.options, config.grid_points)
    path = Path(config.output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        fh.write("phi_rad,objective\n")
        for phi, value in result.profile:
            fh.write(f"{phi!r},{value!r}\n")
    doc = {
        "config": config_to_dict(config),
        "scenario": scenario_to_dict(scenario),
        "result": _solve_record(config, weights, 0, result),
        "failures": result.failures,
    }
    _write_json(path.with_suffix(".json"), doc)
    return result.best_objective, result.best_rotation


def cmd_tradeoff(config, args):
    records, rows = run_tradeoff_sweep(config, args.workers)
    write_tradeoff(records, rows, config, config.output_path)
    lead = [r for r in rows if r["scheme"] == config.schemes[0]]
    objective = math.fsum(r["objective"] for r in lead) / len(lead)
    rotation = math.fsum(r["rotation"] for r in lead) / len(lead)
    return objective, rotation


def cmd_beampattern(config, args):
    cases = None
    if args.omega1 is not None:
        cases = {f"omega1={config.weight_grid[0].comm_weight}": config.weight_grid[0]}
    result = run_beampattern(config, cases)
    write_beampattern(result, config, config.output_path)
    last = list(result["cases"].values())[-1]
    return last["objective"], last["rotation"]


def _mc_sample(config, weights, index):
    scenario = realization_scenario(config, index)
    result = rotation_search(scenario, weights, config.options, config.grid_points)
    return _solve_record(config, weights, index, result)


def cmd_montecarlo(config, args):
    weights = _single_weight(config, args)
    out = run_monte_carlo(partial(_mc_sample, config, weights), config.monte_carlo_runs, args.workers)
    samples = out["samples"]
    scalars = [
        {"objective": s["objective"], "sum_rate": s["sum_rate"], "rotation": s["rotation"],
         "log10_crb": math.log10(s["crb"]) if not s["degenerate"] else math.inf}
        for s in samples
    ]
    doc = {"config": config_to_dict(config), "summary": summarize(scalars), "samples": samples}
    _write_json(Path(config.output_path), doc)
    return doc["summary"]["mean"]["objective"], doc["summary"]["mean"]["rotation"]


def cmd_validate(config, args):
    print(json.dumps(config_to_dict(config), indent=2))
    return None


COMMANDS = {
    "solve": (cmd_solve, "joint beamforming and rotation design on one scenario"),
    "rotation-search": (cmd_rotation_search, "write the objective profile over the rotation grid"),
    "tradeoff": (cmd_tradeoff, "weight sweep over all schemes (Monte Carlo)"),
    "beampattern": (cmd_beampattern, "beam patterns for sensing-only, communication-only and joint designs"),
    "montecarlo": (cmd_montecarlo, "mean and standard error of the joint design over realizations"),
    "validate-config": (cmd_validate, "check a config file and print the resolved parameters"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment config (default: shipped config)")
    common.add_argument("--seed", type=int, help="base seed for scenario draws")
    common.add_argument("--output", metavar="PATH", help="output file; parent directories are created")
    common.add_argument("--grid-points", type=int, help="rotation grid size")
    common.add_argument("--omega1", type=float, help="communication weight; the sensing weight is 1 - omega1")
    common.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="processes for Monte Carlo realizations (default: logical cores)")
    common.add_argument("--mc-runs", type=int, help="number of Monte Carlo realizations")
    parser = argparse.ArgumentParser(
        prog="ra-isac",
        description="Joint beamforming and array-rotation design for sensing and communication.",
        epilog="Set RA_ISAC_LOG to error, warn, info or debug to control diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def _setup_logging() -> None:
    level_name = os.environ.get("RA_ISAC_LOG", "warn").lower()
    level = LOG_LEVELS.get(level_name)
    logging.basicConfig(level=level or logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if level is None:
        log.warning("unknown RA_ISAC_LOG value %r; using warn", level_name)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging()
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        config = resolve_config(args)
        handler, _ = COMMANDS[args.command]
        outcome = handler(config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    if outcome is not None:
        objective, rotation = outcome
        wall = time.perf_counter() - start
        print(f"{args.command}: objective={objective!r} phi*={rotation!r} wall={wall:.3f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
