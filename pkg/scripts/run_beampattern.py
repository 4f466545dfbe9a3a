"""Beam patterns of the sensing-only, communication-only and joint designs
for one two-user line-of-sight scenario.

    python3 scripts/run_beampattern.py [--seed S] [--out results/beampattern.csv]
"""

import argparse

import numpy as np

from ra_isac.config import default_config
from ra_isac.harness import run_beampattern, write_beampattern


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="results/beampattern.csv")
    args = parser.parse_args()

    config = default_config("beampattern").with_overrides(seed=args.seed)
    result = run_beampattern(config)
    write_beampattern(result, config, args.out)
    angles = result["angles"]
    for name, case in result["cases"].items():
        peak = angles[np.argmax(case["gain"])]
        users = ", ".join(f"{u:+.3f}" for u in case["user_los_angles"])
        print(f"{name:<20} phi*={case['rotation']:+.3f}  peak at {peak:+.3f}  "
              f"target {case['target_angle']:+.3f}  users [{users}]")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
