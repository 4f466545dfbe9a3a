import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import ra_isac.optimizer as optimizer
from ra_isac.channel import ScenarioDistribution, draw_scenario
from ra_isac.metrics import WeightPair, crb_closed, illumination, sum_rate
from ra_isac.optimizer import (
    joint_solve,
    rotation_grid,
    rotation_search,
    sensing_only_rotation,
    zf_profile,
    zf_rotation_search,
)
from ra_isac.solver import MultiplierSearchError, SingularChannelError, fp_bcd_solve

from conftest import make_scenario

SMALL = ScenarioDistribution(num_tx=8, num_rx=8, num_users=2, num_nlos_paths=2)


def test_grid_includes_ends_and_zero():
    grid = rotation_grid((-math.pi / 6, math.pi / 6), 361)
    assert grid[0] == -math.pi / 6 and grid[-1] == math.pi / 6
    assert 0.0 in grid and len(grid) == 361
    even = rotation_grid((-1.0, 1.0), 10)
    assert np.count_nonzero(even == 0.0) == 1
    assert np.all(np.diff(even) > 0)


def test_grid_without_zero_is_plain_linspace():
    np.testing.assert_array_equal(rotation_grid((0.1, 0.5), 5), np.linspace(0.1, 0.5, 5))


def test_grid_rejects_single_point():
    with pytest.raises(ValueError):
        rotation_grid((-1, 1), 1)


@pytest.mark.parametrize("weights", [WeightPair(1, 0), WeightPair(0.5, 0.5), WeightPair(0, 1)])
def test_search_contains_fixed_rotation_design(weights):
    sc = draw_scenario(SMALL, 4)
    res = rotation_search(sc, weights, grid_points=31)
    fixed = fp_bcd_solve(sc, 0.0, weights)
    profile = dict(res.profile)
    assert profile[0.0] == fixed.objective
    assert res.best_objective >= fixed.objective
    assert res.best_objective == res.objectives.max()
    assert res.best_rotation == res.rotations[np.argmax(res.objectives)]
    assert sc.rotation_region[0] <= res.best_rotation <= sc.rotation_region[1]


def test_search_modes_agree_on_cold_starts():
    sc = draw_scenario(SMALL, 2)
    w = WeightPair(0.5, 0.5)
    cold = rotation_search(sc, w, grid_points=9, warm_start=False)
    parallel = rotation_search(sc, w, grid_points=9, workers=2)
    assert cold.profile == parallel.profile
    np.testing.assert_array_equal(cold.best_solution.beams, parallel.best_solution.beams)


def test_refinement_never_hurts():
    sc = draw_scenario(SMALL, 6)
    w = WeightPair(0.7, 0.3)
    coarse = rotation_search(sc, w, grid_points=11)
    refined = rotation_search(sc, w, grid_points=11, refine=True)
    assert refined.best_objective >= coarse.best_objective
    spacing = (sc.rotation_region[1] - sc.rotation_region[0]) / 10
    assert abs(refined.best_rotation - coarse.best_rotation) <= spacing + 1e-12


def test_failed_points_are_skipped(monkeypatch):
    sc = draw_scenario(SMALL, 1)
    real = optimizer.fp_bcd_solve

    def flaky(scenario, rotation, *args, **kwargs):
        if rotation > 0.2:
            raise MultiplierSearchError("forced", 1.0)
        return real(scenario, rotation, *args, **kwargs)

    monkeypatch.setattr(optimizer, "fp_bcd_solve", flaky)
    res = rotation_search(sc, WeightPair(0.5, 0.5), grid_points=21)
    assert res.failures == int(np.sum(rotation_grid(sc.rotation_region, 21) > 0.2))
    assert res.best_rotation <= 0.2
    assert np.isneginf(res.objectives).sum() == res.failures


def test_all_points_failing_raises(monkeypatch):
    def broken(*args, **kwargs):
        raise MultiplierSearchError("forced", 1.0)

    monkeypatch.setattr(optimizer, "fp_bcd_solve", broken)
    with pytest.raises(RuntimeError):
        rotation_search(draw_scenario(SMALL, 1), WeightPair(1, 0), grid_points=5)


@pytest.mark.parametrize(
    "theta, expected",
    [(0.3, -0.3), (-0.2, 0.2), (1.0, -math.pi / 6), (-1.0, math.pi / 6), (0.0, 0.0)],
)
def test_sensing_only_rotation_examples(theta, expected):
    assert sensing_only_rotation(theta, (-math.pi / 6, math.pi / 6)) == pytest.approx(expected, abs=1e-15)


@given(st.floats(-3.0, 3.0), st.floats(0.0, 1.5), st.floats(0.01, 1.5))
def test_sensing_only_rotation_is_optimal(theta, lo, width):
    region = (-lo, -lo + width)
    phi = sensing_only_rotation(theta, region)
    assert region[0] <= phi <= region[1]
    grid = np.linspace(*region, 1001)
    assert math.cos(theta + phi) ** 2 >= np.max(np.cos(theta + grid) ** 2) - 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_sensing_only_joint_design(seed):
    sc = draw_scenario(SMALL, seed)
    grid_points = 61
    res = joint_solve(sc, WeightPair(0.0, 1.0), grid_points=grid_points)
    m = sc.tx_geometry.num_elements
    assert illumination(res.best_solution, sc, res.best_rotation) >= 0.999 * sc.power_budget * m
    cell = (sc.rotation_region[1] - sc.rotation_region[0]) / (grid_points - 1)
    assert abs(res.best_rotation - sensing_only_rotation(sc.target.nominal_angle, sc.rotation_region)) <= cell
    fixed = fp_bcd_solve(sc, 0.0, WeightPair(0.0, 1.0))
    assert crb_closed(res.best_solution, sc, res.best_rotation).value <= crb_closed(fixed.solution, sc, 0.0).value


def test_zf_search_follows_profile():
    sc = draw_scenario(SMALL, 3)
    grid = rotation_grid(sc.rotation_region, 21)
    prof = zf_profile(sc, grid)
    comm = zf_rotation_search(sc, WeightPair(1, 0), profile=prof)
    assert comm.best_objective == np.nanmax(prof["sum_rate"])
    assert sum_rate(sc, comm.best_solution.beams, comm.best_rotation) == pytest.approx(comm.best_objective)
    sense = zf_rotation_search(sc, WeightPair(0, 1), grid_points=21)
    assert sense.best_objective == np.nanmax(prof["sensing"])


def test_zf_search_all_singular():
    sc = make_scenario([[(1.0, 0.1)], [(1.0, 0.1)]], num_tx=4)
    with pytest.raises(SingularChannelError):
        zf_rotation_search(sc, WeightPair(1, 0), grid_points=5)
