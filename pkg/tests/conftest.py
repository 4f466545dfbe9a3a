import math

import numpy as np
import pytest
from hypothesis import settings

from ra_isac.channel import PathComponent, Scenario, ScenarioDistribution, SensingTarget, draw_scenario
from ra_isac.geometry import ArrayGeometry

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def make_scenario(paths_per_user, num_tx=16, num_rx=16, target_angle=0.0, sensing_snr=0.1,
                  power=1.0, region=(-math.pi / 6, math.pi / 6), snapshots=100):
    """Scenario from ``[[(gain, angle), ...], ...]``."""
    users = tuple(tuple(PathComponent(complex(g), float(t)) for g, t in paths) for paths in paths_per_user)
    return Scenario(
        tx_geometry=ArrayGeometry(num_tx),
        rx_geometry=ArrayGeometry(num_rx),
        users=users,
        noise_powers=(1.0,) * len(users),
        target=SensingTarget(target_angle, sensing_snr),
        snapshots=snapshots,
        power_budget=power,
        rotation_region=region,
    )


@pytest.fixture
def default_scenario():
    return draw_scenario(ScenarioDistribution(), 7)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance reporting -----------------------------------------------------

ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """``record(criterion, part, passed, detail)``; results are printed in the terminal summary."""
    results = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(criterion, part, passed, detail):
        results.setdefault(criterion, []).append((part, bool(passed), detail))
        print(f"criterion {criterion} [{part}]: {'PASS' if passed else 'FAIL'} - {detail}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE, None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(results):
        parts = results[criterion]
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{part} {'ok' if ok else 'FAILED'}: {d}" for part, ok, d in parts)
        terminalreporter.write_line(f"criterion {criterion}: {verdict} | {detail}")
