"""Scalar performance functionals: SINR, sum-rate, angle CRB and friends.

Beams are stored column-wise: ``beams[:, k]`` is the beamformer of user ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .channel import Scenario, user_channels
from .geometry import steering_derivative, steering_vector

__all__ = [
    "BeamformingSolution",
    "WeightPair",
    "CrbResult",
    "BeamPattern",
    "UnboundedGainError",
    "sinr_all",
    "sinr",
    "sum_rate",
    "illumination",
    "crb_constant",
    "crb_direct",
    "crb_closed",
    "sensing_objective",
    "weighted_objective",
    "beam_pattern",
    "array_correlation",
    "rotation_gain",
    "max_rotation_gain",
    "equivalent_aperture",
]

# Fisher-information level below which the CRB is reported as degenerate.
DEGENERATE_THRESHOLD = 1e-30


@dataclass(frozen=True)
class BeamformingSolution:
    beams: np.ndarray
    covariance: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        beams = np.array(self.beams, dtype=complex)
        if beams.ndim == 1:
            beams = beams[:, None]
        beams.setflags(write=False)
        object.__setattr__(self, "beams", beams)
        cov = beams @ beams.conj().T
        cov.setflags(write=False)
        object.__setattr__(self, "covariance", cov)

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.beams) ** 2))


@dataclass(frozen=True)
class WeightPair:
    comm_weight: float
    sense_weight: float

    def __post_init__(self):
        if not (0 <= self.comm_weight <= 1 and 0 <= self.sense_weight <= 1):
            raise ValueError(f"weights must lie in [0, 1], got {self}")
        if abs(self.comm_weight + self.sense_weight - 1) > 1e-12:
            raise ValueError(f"weights must sum to one, got {self}")

    @classmethod
    def from_comm(cls, comm_weight: float) -> "WeightPair":
        comm_weight = float(comm_weight)
        return cls(comm_weight, 1.0 - comm_weight)


class CrbResult(NamedTuple):
    """CRB value in rad^2; ``degenerate`` flags an infinite bound."""

    value: float
    degenerate: bool


def _beams(solution) -> np.ndarray:
    beams = solution.beams if isinstance(solution, BeamformingSolution) else np.asarray(solution)
    return beams[:, None] if beams.ndim == 1 else beams


def sinr_all(scenario: Scenario, beams, rotation: float, channels: np.ndarray | None = None) -> np.ndarray:
    """SINR of every user as a length-K array."""
    beams = _beams(beams)
    if channels is None:
        channels = user_channels(scenario, rotation)
    if beams.shape != channels.shape:
        raise ValueError(f"beams shape {beams.shape} does not match channels {channels.shape}")
    gram = np.abs(channels.conj().T @ beams) ** 2  # [k, i] = |h_k^H w_i|^2
    signal = np.diag(gram)
    interference = gram.sum(axis=1) - signal
    return signal / (interference + scenario.noise)


def sinr(scenario: Scenario, beams, user_index: int, rotation: float) -> float:
    if not 0 <= user_index < scenario.num_users:
        raise IndexError(f"user_index {user_index} out of range for K={scenario.num_users}")
    return float(sinr_all(scenario, beams, rotation)[user_index])


def sum_rate(scenario: Scenario, beams, rotation: float, channels: np.ndarray | None = None) -> float:
    """Achievable sum-rate in bits/s/Hz."""
    return float(np.sum(np.log2(1 + sinr_all(scenario, beams, rotation, channels))))


def illumination(solution, scenario: Scenario, rotation: float) -> float:
    """Transmit power toward the target, ``a_T^H W a_T``."""
    a = steering_vector(scenario.tx_geometry, scenario.target.nominal_angle + rotation)
    proj = a.conj() @ _beams(solution)
    return float(np.sum(np.abs(proj) ** 2))


def crb_constant(scenario: Scenario) -> float:
    """The array/SNR constant of the closed-form CRB (``chi``)."""
    rx = scenario.rx_geometry
    m = rx.num_elements
    return (
        3 * rx.wavelength**2 * (m - 1)
        / (2 * math.pi**2 * scenario.snapshots * scenario.target.sensing_snr * m * (m + 1) * rx.aperture**2)
    )


def crb_direct(solution, scenario: Scenario, rotation: float) -> CrbResult:
    """CRB from the steering-derivative norm, without the ULA closed form."""
    angle = scenario.target.nominal_angle + rotation
    rx = scenario.rx_geometry
    deriv_sq = float(np.sum(np.abs(steering_derivative(rx, angle)) ** 2))
    power = illumination(solution, scenario, rotation)
    # normalise the derivative norm by its broadside value so the degeneracy
    # test matches crb_closed's cos^2 * power
    scale = rx.wavenumber**2 * float(np.sum(rx.offsets**2))
    if deriv_sq / scale * power < DEGENERATE_THRESHOLD:
        return CrbResult(math.inf, True)
    denom = 2 * scenario.snapshots * scenario.target.sensing_snr * deriv_sq * power
    return CrbResult(1 / denom, False)


def crb_closed(solution, scenario: Scenario, rotation: float) -> CrbResult:
    """CRB as ``chi / (cos^2(theta + phi) a_T^H W a_T)``."""
    info = sensing_objective(solution, scenario, rotation)
    if info < DEGENERATE_THRESHOLD:
        return CrbResult(math.inf, True)
    return CrbResult(crb_constant(scenario) / info, False)


def sensing_objective(solution, scenario: Scenario, rotation: float) -> float:
    """``cos^2(theta + phi) a_T^H W a_T``; larger is better."""
    angle = scenario.target.nominal_angle + rotation
    return math.cos(angle) ** 2 * illumination(solution, scenario, rotation)


def weighted_objective(solution, scenario: Scenario, rotation: float, weights: WeightPair) -> float:
    """``w1 * sum_rate + w2 * sensing_objective``, the value maximised by the solvers."""
    value = 0.0
    if weights.comm_weight:
        value += weights.comm_weight * sum_rate(scenario, _beams(solution), rotation)
    if weights.sense_weight:
        value += weights.sense_weight * sensing_objective(solution, scenario, rotation)
    return value


@dataclass(frozen=True)
class BeamPattern:
    angles: np.ndarray
    gain: np.ndarray  # normalised so the grid maximum is 1
    raw: np.ndarray  # a^H W a per angle
    all_zero: bool = False


def beam_pattern(solution, geometry_or_scenario, angle_grid) -> BeamPattern:
    """Transmit beam pattern over effective angles, normalised by its grid maximum.

    The grid is in the array frame, so rotation does not enter here.
    """
    geometry = getattr(geometry_or_scenario, "tx_geometry", geometry_or_scenario)
    angles = np.atleast_1d(np.asarray(angle_grid, dtype=float))
    if angles.size == 0:
        raise ValueError("angle grid is empty")
    a = steering_vector(geometry, angles)  # (M, N)
    raw = np.sum(np.abs(a.conj().T @ _beams(solution)) ** 2, axis=1)
    peak = raw.max()
    if peak < DEGENERATE_THRESHOLD:
        return BeamPattern(angles, np.zeros_like(raw), raw, all_zero=True)
    return BeamPattern(angles, raw / peak, raw)


class UnboundedGainError(ValueError):
    """The fixed-array correlation sits on a null, so the rotation gain diverges."""


def _dirichlet(x, m: int):
    """``|sin(m x) / sin(x)|`` with the limit ``m`` where ``sin(x) = 0``."""
    x = np.asarray(x, dtype=float)
    s = np.sin(x)
    small = np.abs(s) < 1e-12
    safe = np.where(small, 1.0, s)
    return np.where(small, float(m), np.abs(np.sin(m * x) / safe))


def array_correlation(theta0, theta1, num_elements: int, spacing: float = 0.5, wavelength: float = 1.0):
    """``|a^H(theta0) a(theta1)|`` for a centred ULA, via the Dirichlet kernel."""
    delta = np.cos((theta0 + theta1) / 2) * np.sin((theta0 - theta1) / 2)
    return _dirichlet(np.pi * (spacing / wavelength) * 2 * delta, num_elements)


def rotation_gain(theta0, theta1, rotation, num_elements: int, spacing: float = 0.5, wavelength: float = 1.0):
    """Correlation of two path steering vectors after rotation relative to before.

    Raises
    ------
    UnboundedGainError
        If the unrotated correlation is below ``1e-12``.
    """
    fixed = array_correlation(theta0, theta1, num_elements, spacing, wavelength)
    if np.any(fixed < 1e-12):
        raise UnboundedGainError("fixed-rotation correlation is at a null; gain is unbounded")
    rotated = array_correlation(
        np.add(theta0, rotation), np.add(theta1, rotation), num_elements, spacing, wavelength
    )
    return rotated / fixed


def max_rotation_gain(theta0: float, theta1: float, num_elements: int,
                      spacing: float = 0.5, wavelength: float = 1.0) -> tuple[float, float]:
    """Largest rotation gain over unconstrained rotations and a rotation attaining it.

    The rotated steering vectors coincide when ``cos(phi + zeta2) = 0``, i.e.
    ``phi = +-pi/2 - zeta2``; the one with the smaller magnitude is returned.
    """
    half_sum = (theta0 + theta1) / 2
    if theta0 == theta1:
        return 1.0, 0.0
    fixed = float(array_correlation(theta0, theta1, num_elements, spacing, wavelength))
    if fixed < 1e-12:
        raise UnboundedGainError("fixed-rotation correlation is at a null; gain is unbounded")
    candidates = (math.pi / 2 - half_sum, -math.pi / 2 - half_sum)
    best = min(candidates, key=abs)
    return num_elements / fixed, best


def equivalent_aperture(theta, rotation, receive_aperture):
    """Projected receive aperture ``D_r cos(theta + rotation)``."""
    return receive_aperture * np.cos(np.add(theta, rotation))
