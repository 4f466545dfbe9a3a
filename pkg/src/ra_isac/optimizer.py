"""Array-rotation search wrapped around the inner beamforming solver."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import Scenario, user_channels
from .metrics import BeamformingSolution, WeightPair, sensing_objective, sum_rate
from .solver import (
    InnerSolution,
    MultiplierSearchError,
    SingularChannelError,
    SolverOptions,
    fp_bcd_solve,
    zf_beams,
)

__all__ = [
    "RotationSearchResult",
    "rotation_grid",
    "rotation_search",
    "joint_solve",
    "sensing_only_rotation",
    "zf_profile",
    "zf_rotation_search",
    "DEFAULT_GRID_POINTS",
]

log = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 361
_INVPHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class RotationSearchResult:
    best_rotation: float
    best_objective: float
    best_solution: BeamformingSolution
    profile: tuple  # ((phi, g(phi)), ...) in increasing phi; failed points carry -inf
    failures: int = 0
    converged: bool = True  # every inner solve converged

    @property
    def rotations(self) -> np.ndarray:
        return np.array([phi for phi, _ in self.profile])

    @property
    def objectives(self) -> np.ndarray:
        return np.array([g for _, g in self.profile])


def rotation_grid(region, grid_points: int) -> np.ndarray:
    """Uniform grid over ``[lo, hi]`` (both ends included).

    When the region contains zero, the grid point nearest to zero is snapped
    to exactly 0 so the fixed-rotation design is one of the candidates.
    """
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    lo, hi = float(region[0]), float(region[1])
    grid = np.linspace(lo, hi, grid_points)
    if lo <= 0 <= hi:
        grid[np.argmin(np.abs(grid))] = 0.0
    return grid


def _anchor(grid: np.ndarray) -> int:
    zero = np.flatnonzero(grid == 0.0)
    return int(zero[0]) if zero.size else 0


def _solve_point(args):
    scenario, phi, weights, options, init = args
    try:
        return fp_bcd_solve(scenario, phi, weights, options, init)
    except MultiplierSearchError as exc:
        log.warning("inner solve failed at phi=%.6f: %s", phi, exc)
        return None


def _evaluate_warm(scenario, grid, weights, options):
    """Evaluate outward from the zero (or first) grid point, each point
    warm-started from its already-solved neighbour. The anchor itself is
    solved cold, which makes it identical to a fixed-rotation solve."""
    results: list[InnerSolution | None] = [None] * len(grid)
    start = _anchor(grid)
    results[start] = _solve_point((scenario, grid[start], weights, options, None))
    for direction in (1, -1):
        init = results[start].state.beams if results[start] else None
        i = start + direction
        while 0 <= i < len(grid):
            res = _solve_point((scenario, grid[i], weights, options, init))
            results[i] = res
            if res is not None:
                init = res.state.beams
            i += direction
    return results


def _golden_refine(scenario, weights, options, lo, hi, seed: InnerSolution, seed_phi):
    best_phi, best = seed_phi, seed
    a, b = lo, hi
    c, d = b - _INVPHI * (b - a), a + _INVPHI * (b - a)
    fc = fp_bcd_solve(scenario, c, weights, options, best.state.beams)
    fd = fp_bcd_solve(scenario, d, weights, options, best.state.beams)
    for _ in range(30):
        if fc.objective >= fd.objective:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fp_bcd_solve(scenario, c, weights, options, fd.state.beams)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fp_bcd_solve(scenario, d, weights, options, fc.state.beams)
        if b - a < 1e-9:
            break
    for phi, res in ((c, fc), (d, fd)):
        if res.objective > best.objective:
            best_phi, best = phi, res
    return best_phi, best


def rotation_search(scenario: Scenario, weights: WeightPair, options: SolverOptions | None = None,
                    grid_points: int = DEFAULT_GRID_POINTS, *, warm_start: bool = True,
                    workers: int = 1, refine: bool = False) -> RotationSearchResult:
    """Exhaustive search of the inner optimum ``g(phi)`` over the admissible region.

    Ties go to the smallest rotation. With ``workers > 1`` the grid points are
    solved in separate processes and warm starting is turned off. ``refine``
    runs a golden-section search on the two cells around the grid optimum.
    """
    options = options or SolverOptions()
    grid = rotation_grid(scenario.rotation_region, grid_points)
    if workers > 1:
        jobs = [(scenario, phi, weights, options, None) for phi in grid]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    elif warm_start:
        results = _evaluate_warm(scenario, grid, weights, options)
    else:
        results = [_solve_point((scenario, phi, weights, options, None)) for phi in grid]

    values = np.array([r.objective if r is not None else -np.inf for r in results])
    failures = int(np.sum(~np.isfinite(values)))
    if failures == len(grid):
        raise RuntimeError("inner solver failed at every grid point")
    best = int(np.argmax(values))
    best_phi, best_res = float(grid[best]), results[best]
    if refine:
        lo = grid[max(best - 1, 0)]
        hi = grid[min(best + 1, len(grid) - 1)]
        best_phi, best_res = _golden_refine(scenario, weights, options, lo, hi, best_res, best_phi)
    return RotationSearchResult(
        best_rotation=best_phi,
        best_objective=float(best_res.objective),
        best_solution=best_res.solution,
        profile=tuple(zip(grid.tolist(), values.tolist())),
        failures=failures,
        converged=all(r.converged for r in results if r is not None),
    )


def joint_solve(scenario: Scenario, weights: WeightPair, options: SolverOptions | None = None,
                grid_points: int = DEFAULT_GRID_POINTS, **kwargs) -> RotationSearchResult:
    """Joint beamforming and rotation design.

    Cost is of order ``grid_points * bcd_iterations * K * M_t^3``.
    """
    return rotation_search(scenario, weights, options, grid_points, **kwargs)


def sensing_only_rotation(theta: float, region) -> float:
    """Rotation in ``region`` maximising ``cos^2(theta + phi)``.

    The unconstrained maximisers are ``phi = n pi - theta``; each is clamped
    into the region and the best candidate (smallest ``|phi|`` on ties) wins.
    """
    lo, hi = float(region[0]), float(region[1])
    n_lo = math.floor((lo + theta) / math.pi)
    n_hi = math.ceil((hi + theta) / math.pi)
    candidates = {min(max(n * math.pi - theta, lo), hi) for n in range(n_lo, n_hi + 1)}
    return max(sorted(candidates, key=abs), key=lambda phi: math.cos(theta + phi) ** 2)


def zf_profile(scenario: Scenario, grid) -> dict:
    """Zero-forcing beams over a rotation grid.

    Returns arrays ``sum_rate`` and ``sensing`` (NaN where ZF is singular) and
    the list of beam matrices (``None`` where singular).
    """
    rates, sensing, beams = [], [], []
    for phi in grid:
        channels = user_channels(scenario, phi)
        try:
            w = zf_beams(scenario, phi, channels=channels)
        except SingularChannelError:
            rates.append(np.nan)
            sensing.append(np.nan)
            beams.append(None)
            continue
        rates.append(sum_rate(scenario, w, phi, channels))
        sensing.append(sensing_objective(w, scenario, phi))
        beams.append(w)
    return {"grid": np.asarray(grid), "sum_rate": np.array(rates), "sensing": np.array(sensing), "beams": beams}


def zf_rotation_search(scenario: Scenario, weights: WeightPair, grid_points: int = DEFAULT_GRID_POINTS,
                       profile: dict | None = None) -> RotationSearchResult:
    """Rotation search with zero-forcing beams in place of the inner solver."""
    if profile is None:
        profile = zf_profile(scenario, rotation_grid(scenario.rotation_region, grid_points))
    values = weights.comm_weight * profile["sum_rate"] + weights.sense_weight * profile["sensing"]
    values = np.where(np.isnan(values), -np.inf, values)
    failures = int(np.sum(~np.isfinite(values)))
    if failures == len(values):
        raise SingularChannelError("zero forcing is singular at every grid point")
    best = int(np.argmax(values))
    return RotationSearchResult(
        best_rotation=float(profile["grid"][best]),
        best_objective=float(values[best]),
        best_solution=BeamformingSolution(profile["beams"][best]),
        profile=tuple(zip(profile["grid"].tolist(), values.tolist())),
        failures=failures,
    )
