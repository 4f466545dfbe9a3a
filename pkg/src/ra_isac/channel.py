"""User multipath channels, the sensing round-trip channel, and scenario draws."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import ArrayGeometry, steering_vector

__all__ = [
    "PathComponent",
    "SensingTarget",
    "Scenario",
    "ScenarioDistribution",
    "user_channel",
    "user_channels",
    "sensing_channel",
    "draw_scenario",
    "scenario_to_dict",
    "scenario_from_dict",
]


@dataclass(frozen=True)
class PathComponent:
    gain: complex
    nominal_angle: float


@dataclass(frozen=True)
class SensingTarget:
    nominal_angle: float
    sensing_snr: float  # |beta_s|^2 / sigma_s^2, linear

    def __post_init__(self):
        if not self.sensing_snr > 0:
            raise ValueError(f"sensing_snr must be positive, got {self.sensing_snr}")


@dataclass(frozen=True)
class Scenario:
    """One channel realization plus the system constants around it.

    ``users[k]`` lists the paths of user ``k``; by convention the first entry
    is the line-of-sight component.
    """

    tx_geometry: ArrayGeometry
    rx_geometry: ArrayGeometry
    users: tuple
    noise_powers: tuple
    target: SensingTarget
    snapshots: int = 100
    power_budget: float = 1.0
    rotation_region: tuple = (-math.pi / 6, math.pi / 6)
    # padded (K, L_max) arrays; absent paths carry zero gain
    _gains: np.ndarray = field(init=False, repr=False, compare=False)
    _angles: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        users = tuple(tuple(paths) for paths in self.users)
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "noise_powers", tuple(float(s) for s in self.noise_powers))
        object.__setattr__(self, "rotation_region", tuple(float(r) for r in self.rotation_region))
        if not users:
            raise ValueError("scenario needs at least one user")
        if any(len(paths) == 0 for paths in users):
            raise ValueError("every user needs at least one path")
        if len(self.noise_powers) != len(users):
            raise ValueError("noise_powers must have one entry per user")
        if any(not s > 0 for s in self.noise_powers):
            raise ValueError("noise powers must be positive")
        lo, hi = self.rotation_region
        if lo > hi:
            raise ValueError(f"empty rotation region [{lo}, {hi}]")
        if self.snapshots < 1 or not self.power_budget > 0:
            raise ValueError("snapshots and power_budget must be positive")
        width = max(len(paths) for paths in users)
        gains = np.zeros((len(users), width), dtype=complex)
        angles = np.zeros((len(users), width))
        for k, paths in enumerate(users):
            for l, path in enumerate(paths):
                gains[k, l] = path.gain
                angles[k, l] = path.nominal_angle
        gains.setflags(write=False)
        angles.setflags(write=False)
        object.__setattr__(self, "_gains", gains)
        object.__setattr__(self, "_angles", angles)

    @property
    def num_users(self) -> int:
        return len(self.users)

    @property
    def noise(self) -> np.ndarray:
        return np.asarray(self.noise_powers)

    def los_angles(self) -> np.ndarray:
        return self._angles[:, 0].copy()


def user_channels(scenario: Scenario, rotation: float) -> np.ndarray:
    """All user channels as an ``(M_t, K)`` matrix with column ``k`` equal to ``h_k``.

    ``h_k = sum_l conj(beta_{k,l}) a(theta_{k,l} + rotation)`` so that
    ``h_k^H = sum_l beta_{k,l} a^H(.)``.
    """
    k, width = scenario._angles.shape
    a = steering_vector(scenario.tx_geometry, (scenario._angles + rotation).ravel())
    a = a.reshape(-1, k, width)
    return np.einsum("mkl,kl->mk", a, scenario._gains.conj())


def user_channel(scenario: Scenario, user_index: int, rotation: float) -> np.ndarray:
    if not 0 <= user_index < scenario.num_users:
        raise IndexError(f"user_index {user_index} out of range for K={scenario.num_users}")
    return user_channels(scenario, rotation)[:, user_index]


def sensing_channel(scenario: Scenario, rotation: float, path_gain: complex | None = None) -> np.ndarray:
    """Round-trip channel ``beta_s a_R a_T^H`` (receive-by-transmit).

    ``path_gain`` defaults to ``sqrt(sensing_snr)``, i.e. unit sensing noise.
    """
    if path_gain is None:
        path_gain = math.sqrt(scenario.target.sensing_snr)
    angle = scenario.target.nominal_angle + rotation
    a_r = steering_vector(scenario.rx_geometry, angle)
    a_t = steering_vector(scenario.tx_geometry, angle)
    return path_gain * np.outer(a_r, a_t.conj())


@dataclass(frozen=True)
class ScenarioDistribution:
    """Random scenario generator parameters; the defaults are the reference system setup."""

    num_users: int = 4
    num_nlos_paths: int = 5
    num_tx: int = 16
    num_rx: int = 16
    snapshots: int = 100
    power_budget: float = 1.0
    target_angle_range: tuple = (-math.pi / 3, math.pi / 3)
    path_angle_range: tuple = (-math.pi / 3, math.pi / 3)
    path_gain_db: float = 0.0
    sensing_snr_db: float = -10.0
    rotation_region: tuple = (-math.pi / 6, math.pi / 6)
    spacing: float = 0.5
    wavelength: float = 1.0
    noise_power: float = 1.0

    def __post_init__(self):
        for name in ("target_angle_range", "path_angle_range", "rotation_region"):
            value = tuple(float(v) for v in getattr(self, name))
            if len(value) != 2 or value[0] > value[1]:
                raise ValueError(f"{name} must be an interval [lo, hi], got {value}")
            object.__setattr__(self, name, value)
        if self.num_users < 1 or self.num_nlos_paths < 0:
            raise ValueError("need num_users >= 1 and num_nlos_paths >= 0")
        if self.num_tx < 2 or self.num_rx < 2:
            raise ValueError("arrays need at least two elements")
        if self.snapshots < 1 or not self.power_budget > 0 or not self.noise_power > 0:
            raise ValueError("snapshots, power_budget and noise_power must be positive")

    def to_dict(self) -> dict:
        out = asdict(self)
        for name in ("target_angle_range", "path_angle_range", "rotation_region"):
            out[name] = list(out[name])
        return out


def draw_scenario(dist: ScenarioDistribution, seed) -> Scenario:
    """Draw one scenario.

    Stream splitting: ``SeedSequence(seed).spawn(K + 1)`` gives child 0 to the
    target and child ``k + 1`` to user ``k``, so a user's paths do not depend
    on how many users follow it. Within a user stream the order is: path
    angles (LoS first), LoS phase, then NLoS gains.
    """
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = seq.spawn(dist.num_users + 1)

    target_rng = np.random.default_rng(children[0])
    target = SensingTarget(
        nominal_angle=float(target_rng.uniform(*dist.target_angle_range)),
        sensing_snr=10 ** (dist.sensing_snr_db / 10),
    )

    path_power = dist.noise_power * 10 ** (dist.path_gain_db / 10)
    users = []
    for child in children[1:]:
        rng = np.random.default_rng(child)
        angles = rng.uniform(*dist.path_angle_range, size=dist.num_nlos_paths + 1)
        los = math.sqrt(path_power) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        nlos = math.sqrt(path_power / 2) * (
            rng.standard_normal(dist.num_nlos_paths) + 1j * rng.standard_normal(dist.num_nlos_paths)
        )
        gains = np.concatenate([[los], nlos])
        users.append(tuple(PathComponent(complex(g), float(t)) for g, t in zip(gains, angles)))

    return Scenario(
        tx_geometry=ArrayGeometry(dist.num_tx, dist.spacing, dist.wavelength),
        rx_geometry=ArrayGeometry(dist.num_rx, dist.spacing, dist.wavelength),
        users=tuple(users),
        noise_powers=(dist.noise_power,) * dist.num_users,
        target=target,
        snapshots=dist.snapshots,
        power_budget=dist.power_budget,
        rotation_region=dist.rotation_region,
    )


def _geometry_dict(g: ArrayGeometry) -> dict:
    return {"num_elements": g.num_elements, "spacing": g.spacing, "wavelength": g.wavelength}


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "tx_geometry": _geometry_dict(scenario.tx_geometry),
        "rx_geometry": _geometry_dict(scenario.rx_geometry),
        "users": [
            [{"gain_re": p.gain.real, "gain_im": p.gain.imag, "angle_rad": p.nominal_angle} for p in paths]
            for paths in scenario.users
        ],
        "noise_powers": list(scenario.noise_powers),
        "target": {
            "angle_rad": scenario.target.nominal_angle,
            "sensing_snr": scenario.target.sensing_snr,
        },
        "snapshots": scenario.snapshots,
        "power_budget": scenario.power_budget,
        "rotation_region": list(scenario.rotation_region),
    }


def scenario_from_dict(data: dict) -> Scenario:
    return Scenario(
        tx_geometry=ArrayGeometry(**data["tx_geometry"]),
        rx_geometry=ArrayGeometry(**data["rx_geometry"]),
        users=tuple(
            tuple(PathComponent(complex(p["gain_re"], p["gain_im"]), float(p["angle_rad"])) for p in paths)
            for paths in data["users"]
        ),
        noise_powers=tuple(data["noise_powers"]),
        target=SensingTarget(float(data["target"]["angle_rad"]), float(data["target"]["sensing_snr"])),
        snapshots=int(data["snapshots"]),
        power_budget=float(data["power_budget"]),
        rotation_region=tuple(data["rotation_region"]),
    )
