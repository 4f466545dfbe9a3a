"""Wall time of the full default tradeoff sweep and of the reduced CI profile
(8 antennas, 61 grid points, 5 realizations).

    python3 scripts/time_profiles.py [--skip-full]
"""

import argparse
import os
import time

from ra_isac.channel import ScenarioDistribution
from ra_isac.config import ExperimentConfig
from ra_isac.harness import run_tradeoff_sweep


def timed(config, workers):
    start = time.perf_counter()
    run_tradeoff_sweep(config, workers)
    return time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--skip-full", action="store_true")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    args = parser.parse_args()

    ci = ExperimentConfig(distribution=ScenarioDistribution(num_tx=8, num_rx=8), grid_points=61, monte_carlo_runs=5)
    print(f"CI profile: {timed(ci, args.workers):.1f}s (budget 120s)")
    if not args.skip_full:
        print(f"full defaults: {timed(ExperimentConfig(), args.workers):.1f}s (budget 1800s)")


if __name__ == "__main__":
    main()
