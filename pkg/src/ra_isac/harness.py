"""Monte Carlo experiments: weight-sweep tradeoff and beam patterns.

Realization ``i`` of an experiment with base seed ``s`` uses the scenario
seed ``realization_seed(s, i)``, so results do not depend on how the
realizations are spread over worker processes.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import partial
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .channel import Scenario, draw_scenario, scenario_to_dict
from .config import ExperimentConfig, config_to_dict
from .metrics import WeightPair, beam_pattern, crb_closed, sensing_objective, sum_rate
from .optimizer import rotation_grid, rotation_search, zf_profile, zf_rotation_search
from .solver import fp_bcd_solve

__all__ = [
    "TradeoffRecord",
    "realization_seed",
    "realization_scenario",
    "map_realizations",
    "summarize",
    "run_monte_carlo",
    "evaluate_realization",
    "aggregate_tradeoff",
    "run_tradeoff_sweep",
    "write_tradeoff",
    "read_tradeoff_csv",
    "run_beampattern",
    "write_beampattern",
    "PATTERN_CASES",
]

log = logging.getLogger(__name__)

CSV_FIELDS = ("scheme", "omega1", "mean_sum_rate_bps_hz", "mean_crb_rad2", "mean_log10_crb", "mean_phi_rad", "runs")


def realization_seed(seed: int, index: int) -> int:
    """Scenario seed for realization ``index``: first word of ``SeedSequence([seed, index])``."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def realization_scenario(config: ExperimentConfig, index: int) -> Scenario:
    return draw_scenario(config.distribution, realization_seed(config.seed, index))


def map_realizations(fn: Callable[[int], object], runs: int, workers: int = 1) -> list:
    """``[fn(0), ..., fn(runs - 1)]``, optionally across processes (``fn`` must pickle)."""
    if workers <= 1 or runs == 1:
        return [fn(i) for i in range(runs)]
    with ProcessPoolExecutor(max_workers=min(workers, runs)) as pool:
        return list(pool.map(fn, range(runs)))


def summarize(samples: Sequence) -> dict:
    """Mean and standard error of scalar or dict-of-scalar samples, in input order."""
    if not samples:
        raise ValueError("no samples")
    scalar = not isinstance(samples[0], dict)
    rows = [{"value": s} for s in samples] if scalar else list(samples)
    n = len(rows)
    mean, stderr = {}, {}
    for key in rows[0]:
        values = [float(r[key]) for r in rows]
        m = math.fsum(values) / n
        mean[key] = m
        if n > 1:
            var = math.fsum((v - m) ** 2 for v in values) / (n - 1)
            stderr[key] = math.sqrt(var / n)
        else:
            stderr[key] = 0.0
    if scalar:
        return {"runs": n, "mean": mean["value"], "stderr": stderr["value"]}
    return {"runs": n, "mean": mean, "stderr": stderr}


def run_monte_carlo(metric: Callable[[int], object], runs: int, workers: int = 1) -> dict:
    """Evaluate ``metric`` on realizations ``0..runs-1`` and summarise it."""
    samples = map_realizations(metric, runs, workers)
    out = summarize(samples)
    out["samples"] = samples
    return out


def _row(scheme, weights, index, scenario, solution, rotation, objective, converged=True) -> dict:
    crb = crb_closed(solution, scenario, rotation)
    return {
        "realization": index,
        "scheme": scheme,
        "comm_weight": weights.comm_weight,
        "sense_weight": weights.sense_weight,
        "rotation": float(rotation),
        "objective": float(objective),
        "sum_rate": sum_rate(scenario, solution.beams, rotation),
        "sensing": sensing_objective(solution, scenario, rotation),
        "crb": crb.value,
        "degenerate": crb.degenerate,
        "converged": bool(converged),
    }


def evaluate_realization(config: ExperimentConfig, index: int) -> list[dict]:
    """All schemes and weight pairs on one scenario draw."""
    scenario = realization_scenario(config, index)
    zf = None
    if "rotation-only-zf" in config.schemes:
        zf = zf_profile(scenario, rotation_grid(scenario.rotation_region, config.grid_points))
    rows = []
    for weights in config.weight_grid:
        if "proposed" in config.schemes:
            res = rotation_search(scenario, weights, config.options, config.grid_points)
            rows.append(_row("proposed", weights, index, scenario, res.best_solution,
                             res.best_rotation, res.best_objective, res.converged))
        if "beamforming-only" in config.schemes:
            inner = fp_bcd_solve(scenario, 0.0, weights, config.options)
            rows.append(_row("beamforming-only", weights, index, scenario, inner.solution,
                             0.0, inner.objective, inner.converged))
        if zf is not None:
            res = zf_rotation_search(scenario, weights, profile=zf)
            rows.append(_row("rotation-only-zf", weights, index, scenario, res.best_solution,
                             res.best_rotation, res.best_objective))
    return rows


@dataclass(frozen=True)
class TradeoffRecord:
    scheme: str
    comm_weight: float
    mean_sum_rate: float
    mean_crb: float
    mean_log10_crb: float
    mean_rotation: float
    runs: int  # realizations with a finite CRB


def aggregate_tradeoff(rows: list[dict], config: ExperimentConfig) -> list[TradeoffRecord]:
    """Average per-realization rows into one record per (scheme, weight).

    Realizations whose CRB is degenerate are left out of every mean.
    """
    records = []
    for scheme in config.schemes:
        for weights in config.weight_grid:
            sel = [r for r in rows if r["scheme"] == scheme and r["comm_weight"] == weights.comm_weight
                   and not r["degenerate"]]
            n = len(sel)
            if n == 0:
                records.append(TradeoffRecord(scheme, weights.comm_weight, math.nan, math.inf, math.inf, math.nan, 0))
                continue
            records.append(TradeoffRecord(
                scheme=scheme,
                comm_weight=weights.comm_weight,
                mean_sum_rate=math.fsum(r["sum_rate"] for r in sel) / n,
                mean_crb=math.fsum(r["crb"] for r in sel) / n,
                mean_log10_crb=math.fsum(math.log10(r["crb"]) for r in sel) / n,
                mean_rotation=math.fsum(r["rotation"] for r in sel) / n,
                runs=n,
            ))
    return records


def run_tradeoff_sweep(config: ExperimentConfig, workers: int = 1) -> tuple[list[TradeoffRecord], list[dict]]:
    """Weight sweep over every configured scheme.

    Returns the aggregated records and the flat per-realization rows.
    """
    per_run = map_realizations(partial(evaluate_realization, config), config.monte_carlo_runs, workers)
    rows = [row for run in per_run for row in run]
    nonconverged = sum(not r["converged"] for r in rows)
    if nonconverged:
        log.warning("%d inner solves hit the iteration cap", nonconverged)
    return aggregate_tradeoff(rows, config), rows


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def write_tradeoff(records, rows, config: ExperimentConfig, path) -> tuple[Path, Path]:
    """Write the CSV table and its JSON sidecar (per-realization rows + config)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for r in records:
            writer.writerow([r.scheme, repr(r.comm_weight), repr(r.mean_sum_rate), repr(r.mean_crb),
                             repr(r.mean_log10_crb), repr(r.mean_rotation), r.runs])
    sidecar = _sidecar(path)
    doc = {
        "config": config_to_dict(config),
        "records": [asdict(r) for r in records],
        "realizations": rows,
    }
    sidecar.write_text(json.dumps(doc, indent=1) + "\n")
    return path, sidecar


def read_tradeoff_csv(path) -> list[TradeoffRecord]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            TradeoffRecord(
                scheme=row["scheme"],
                comm_weight=float(row["omega1"]),
                mean_sum_rate=float(row["mean_sum_rate_bps_hz"]),
                mean_crb=float(row["mean_crb_rad2"]),
                mean_log10_crb=float(row["mean_log10_crb"]),
                mean_rotation=float(row["mean_phi_rad"]),
                runs=int(row["runs"]),
            )
            for row in reader
        ]


PATTERN_CASES = {
    "sensing-only": WeightPair(0.0, 1.0),
    "communication-only": WeightPair(1.0, 0.0),
    "joint": WeightPair(0.5, 0.5),
}


def run_beampattern(config: ExperimentConfig, cases: dict | None = None, seed: int | None = None) -> dict:
    """Beam patterns of the joint design for several weight pairs on one scenario.

    The pattern is evaluated over effective angles in ``[-pi/3, pi/3]`` with
    ``config.pattern_points`` samples. Every case also reports the effective
    target and LoS user angles at its optimised rotation.
    """
    cases = PATTERN_CASES if cases is None else cases
    seed = config.seed if seed is None else seed
    scenario = draw_scenario(config.distribution, realization_seed(seed, 0))
    angles = np.linspace(-math.pi / 3, math.pi / 3, config.pattern_points)
    out = {"angles": angles, "scenario": scenario, "cases": {}}
    for name, weights in cases.items():
        res = rotation_search(scenario, weights, config.options, config.grid_points)
        pattern = beam_pattern(res.best_solution, scenario, angles)
        phi = res.best_rotation
        out["cases"][name] = {
            "weights": weights,
            "rotation": phi,
            "objective": res.best_objective,
            "target_angle": scenario.target.nominal_angle + phi,
            "user_los_angles": (scenario.los_angles() + phi).tolist(),
            "gain": pattern.gain,
            "raw": pattern.raw,
            "all_zero": pattern.all_zero,
            "solution": res.best_solution,
        }
    return out


def write_beampattern(result: dict, config: ExperimentConfig, path) -> tuple[Path, Path]:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(result["cases"])
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["angle_rad", *names])
        for i, angle in enumerate(result["angles"]):
            writer.writerow([repr(float(angle)), *(repr(float(result["cases"][n]["gain"][i])) for n in names)])
    doc = {
        "config": config_to_dict(config),
        "scenario": scenario_to_dict(result["scenario"]),
        "cases": {
            name: {
                "comm_weight": case["weights"].comm_weight,
                "sense_weight": case["weights"].sense_weight,
                "rotation": case["rotation"],
                "objective": case["objective"],
                "target_angle": case["target_angle"],
                "user_los_angles": case["user_los_angles"],
                "raw_gain": case["raw"].tolist(),
                "all_zero": case["all_zero"],
            }
            for name, case in result["cases"].items()
        },
    }
    sidecar = _sidecar(path)
    sidecar.write_text(json.dumps(doc, indent=1) + "\n")
    return path, sidecar
