"""Joint transmit beamforming and array-rotation design for integrated
sensing and communication with a rotatable uniform linear array."""

from .channel import PathComponent, Scenario, ScenarioDistribution, SensingTarget, draw_scenario
from .config import ExperimentConfig, default_config, load_config
from .geometry import ArrayGeometry, steering_derivative, steering_vector
from .metrics import (
    BeamformingSolution,
    WeightPair,
    beam_pattern,
    crb_closed,
    crb_direct,
    max_rotation_gain,
    rotation_gain,
    sensing_objective,
    sum_rate,
)
from .optimizer import joint_solve, rotation_search, sensing_only_rotation
from .solver import SolverOptions, fp_bcd_solve, mrt_beams, zf_beams

__all__ = [
    "ArrayGeometry",
    "BeamformingSolution",
    "ExperimentConfig",
    "PathComponent",
    "Scenario",
    "ScenarioDistribution",
    "SensingTarget",
    "SolverOptions",
    "WeightPair",
    "beam_pattern",
    "crb_closed",
    "crb_direct",
    "default_config",
    "draw_scenario",
    "fp_bcd_solve",
    "joint_solve",
    "load_config",
    "max_rotation_gain",
    "mrt_beams",
    "rotation_gain",
    "rotation_search",
    "sensing_objective",
    "sensing_only_rotation",
    "steering_derivative",
    "steering_vector",
    "sum_rate",
    "zf_beams",
]
