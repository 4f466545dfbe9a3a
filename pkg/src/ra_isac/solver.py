"""Beamforming for a fixed array rotation.

The weighted objective ``w1 * sum_rate + w2 * cos^2(theta~) a_T^H W a_T`` is
maximised by block coordinate ascent on a quadratic-transform surrogate.
Auxiliary blocks are the SINR proxies ``alpha``, the communication
multipliers ``b`` and the sensing multipliers ``b_s``; every block has a
closed-form update and the beam update needs one scalar power multiplier.

The rate is measured in bits, i.e. ``w1 log2(1+g) = (w1/ln 2) ln(1+g)``. The
surrogate therefore carries the fractional terms with weight ``w1/ln 2``;
with that weight ``alpha = SINR`` is the exact block maximiser and the
surrogate at the auxiliary optimum equals the weighted objective.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import Scenario, user_channels
from .geometry import steering_vector
from .metrics import BeamformingSolution, WeightPair, sensing_objective, sum_rate

__all__ = [
    "SolverOptions",
    "BcdState",
    "InnerSolution",
    "MultiplierSearchError",
    "SingularChannelError",
    "transformed_objective",
    "surrogate_objective",
    "update_alpha",
    "update_b",
    "update_bs",
    "update_w",
    "fp_bcd_solve",
    "mrt_beams",
    "zf_beams",
    "sensing_optimal_covariance",
]

log = logging.getLogger(__name__)

ALPHA_FLOOR = 1e-12
INIT_SCHEMES = ("mrt-equal-power", "random")


class MultiplierSearchError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (last power residual {residual:.3e})")
        self.residual = residual


class SingularChannelError(ValueError):
    """The stacked user channel matrix is not of full row rank."""


@dataclass(frozen=True)
class SolverOptions:
    max_bcd_iters: int = 200
    rel_tolerance: float = 1e-6
    mu_tolerance: float = 1e-10
    mu_max_iters: int = 200
    init_scheme: str = "mrt-equal-power"
    seed: int = 0  # only used by the random initialisation

    def __post_init__(self):
        if self.max_bcd_iters < 1 or self.mu_max_iters < 1:
            raise ValueError("iteration caps must be positive")
        if not (self.rel_tolerance > 0 and self.mu_tolerance > 0):
            raise ValueError("tolerances must be positive")
        if self.init_scheme not in INIT_SCHEMES:
            raise ValueError(f"init_scheme must be one of {INIT_SCHEMES}, got {self.init_scheme!r}")


@dataclass
class BcdState:
    beams: np.ndarray  # (M_t, K)
    alpha: np.ndarray
    b: np.ndarray
    b_s: np.ndarray
    objective_trace: list = field(default_factory=list)

    @classmethod
    def from_beams(cls, beams: np.ndarray) -> "BcdState":
        beams = np.array(beams, dtype=complex)
        k = beams.shape[1]
        return cls(beams, np.full(k, ALPHA_FLOOR), np.zeros(k, complex), np.zeros(k, complex))


@dataclass(frozen=True)
class _Problem:
    """Quantities that stay fixed while the blocks are updated."""

    channels: np.ndarray  # (M_t, K), column k = h_k
    steering: np.ndarray  # a_T(theta~)
    noise: np.ndarray
    power: float
    comm: float  # w1 / ln 2
    rate_weight: float  # w1
    sense: float  # sqrt(w2 cos^2 theta~)

    @classmethod
    def build(cls, scenario: Scenario, rotation: float, weights: WeightPair) -> "_Problem":
        angle = scenario.target.nominal_angle + rotation
        return cls(
            channels=user_channels(scenario, rotation),
            steering=steering_vector(scenario.tx_geometry, angle),
            noise=scenario.noise,
            power=scenario.power_budget,
            comm=weights.comm_weight / math.log(2),
            rate_weight=weights.comm_weight,
            sense=math.sqrt(weights.sense_weight * math.cos(angle) ** 2),
        )

    def gram(self, beams):
        """``G[k, i] = h_k^H w_i``."""
        return self.channels.conj().T @ beams


def _surrogate(p: _Problem, s: BcdState) -> float:
    g = p.gram(s.beams)
    total = np.sum(np.abs(g) ** 2, axis=1) + p.noise
    direct = np.diag(g)
    proj = p.steering.conj() @ s.beams
    value = (
        p.rate_weight * np.log2(1 + s.alpha)
        - p.comm * s.alpha
        + 2 * np.sqrt(p.comm * (1 + s.alpha)) * np.real(s.b.conj() * direct)
        - np.abs(s.b) ** 2 * total
        + 2 * p.sense * np.real(s.b_s.conj() * proj)
        - np.abs(s.b_s) ** 2
    )
    return float(np.sum(value))


def _lagrangian(p: _Problem, s: BcdState) -> float:
    g = p.gram(s.beams)
    total = np.sum(np.abs(g) ** 2, axis=1) + p.noise
    ratio = np.abs(np.diag(g)) ** 2 / total
    proj = p.steering.conj() @ s.beams
    value = (
        p.rate_weight * np.log2(1 + s.alpha)
        - p.comm * s.alpha
        + p.comm * (1 + s.alpha) * ratio
        + p.sense**2 * np.abs(proj) ** 2
    )
    return float(np.sum(value))


def _update_alpha(p: _Problem, s: BcdState) -> None:
    g = np.abs(p.gram(s.beams)) ** 2
    signal = np.diag(g)
    interference = g.sum(axis=1) - signal
    s.alpha = np.maximum(signal / (interference + p.noise), ALPHA_FLOOR)


def _update_b(p: _Problem, s: BcdState) -> None:
    g = p.gram(s.beams)
    total = np.sum(np.abs(g) ** 2, axis=1) + p.noise
    s.b = np.sqrt(p.comm * (1 + s.alpha)) * np.diag(g) / total


def _update_bs(p: _Problem, s: BcdState) -> None:
    s.b_s = p.sense * (p.steering.conj() @ s.beams)


def _solve_multiplier(eigvals, x2, power, tol, max_iter):
    """Smallest ``mu >= 0`` with ``sum x2 / (eigvals + mu)^2 <= power``.

    Returns ``(mu, use_pinv)``; ``use_pinv`` marks the ``mu = 0`` solution on
    a singular matrix whose right-hand side lies in its range.
    """
    total = x2.sum()
    scale = eigvals.max()
    null = eigvals <= 1e-12 * scale if scale > 0 else np.ones_like(eigvals, bool)
    if not np.any(x2[null] > 1e-24 * total):
        live = ~null
        if np.sum(x2[live] / eigvals[live] ** 2) <= power:
            return 0.0, bool(np.any(null))

    def pw(mu):
        return float(np.sum(x2 / (eigvals + mu) ** 2))

    lo, hi = 0.0, 1.0
    iters = 0
    hi_power = pw(hi)
    while hi_power > power:
        iters += 1
        if iters > max_iter:
            raise MultiplierSearchError("could not bracket the power multiplier", hi_power - power)
        lo, hi = hi, 2 * hi
        hi_power = pw(hi)

    # Newton on 1/sqrt(power(mu)), which is close to linear in mu, kept
    # inside the bracket [lo, hi] with bisection as fallback.
    mu, cur = hi, hi_power
    target = 1 / math.sqrt(power)
    while abs(cur - power) > tol * power:
        iters += 1
        if iters > max_iter:
            raise MultiplierSearchError("power multiplier search did not converge", cur - power)
        if cur > power:
            lo = mu
        else:
            hi = mu
        dpw = -2 * float(np.sum(x2 / (eigvals + mu) ** 3))
        phi = 1 / math.sqrt(cur) - target
        dphi = -0.5 * cur**-1.5 * dpw
        step = mu - phi / dphi if dphi > 0 else -1.0
        mu = step if lo < step < hi else 0.5 * (lo + hi)
        cur = pw(mu)
    return mu, False


def _update_w(p: _Problem, s: BcdState, tol: float, max_iter: int) -> float:
    coeff = np.sqrt(p.comm * (1 + s.alpha)) * s.b
    h_eff = p.channels * coeff + np.outer(p.steering, p.sense * s.b_s)
    if not np.any(h_eff):
        s.beams = np.zeros_like(s.beams)
        return 0.0
    quad = (p.channels * np.abs(s.b) ** 2) @ p.channels.conj().T
    eigvals, vecs = np.linalg.eigh(quad)
    eigvals = np.maximum(eigvals, 0.0)
    x = vecs.conj().T @ h_eff
    x2 = np.sum(np.abs(x) ** 2, axis=1)
    mu, pinv = _solve_multiplier(eigvals, x2, p.power, tol, max_iter)
    if pinv:
        keep = eigvals > 1e-12 * eigvals.max()
        s.beams = vecs[:, keep] @ (x[keep] / eigvals[keep, None])
    else:
        s.beams = vecs @ (x / (eigvals + mu)[:, None])
    return mu


# Public block operations. Each rebuilds the fixed problem data, so they are
# meant for inspection and tests; fp_bcd_solve uses the private forms.

def transformed_objective(state: BcdState, scenario: Scenario, rotation: float, weights: WeightPair) -> float:
    """Quadratic-transform surrogate at the current blocks."""
    return _surrogate(_Problem.build(scenario, rotation, weights), state)


def surrogate_objective(state: BcdState, scenario: Scenario, rotation: float, weights: WeightPair) -> float:
    """Surrogate with ``b`` and ``b_s`` maximised out (depends on beams and alpha only)."""
    return _lagrangian(_Problem.build(scenario, rotation, weights), state)


def update_alpha(state: BcdState, scenario: Scenario, rotation: float,
                 weights: WeightPair | None = None) -> np.ndarray:
    _update_alpha(_Problem.build(scenario, rotation, weights or WeightPair(1.0, 0.0)), state)
    return state.alpha


def update_b(state: BcdState, scenario: Scenario, rotation: float, weights: WeightPair) -> np.ndarray:
    _update_b(_Problem.build(scenario, rotation, weights), state)
    return state.b


def update_bs(state: BcdState, scenario: Scenario, rotation: float, weights: WeightPair) -> np.ndarray:
    _update_bs(_Problem.build(scenario, rotation, weights), state)
    return state.b_s


def update_w(state: BcdState, scenario: Scenario, rotation: float, weights: WeightPair,
             options: SolverOptions | None = None) -> float:
    """Beam update; returns the power multiplier used (0 when the budget is slack)."""
    options = options or SolverOptions()
    p = _Problem.build(scenario, rotation, weights)
    return _update_w(p, state, options.mu_tolerance, options.mu_max_iters)


@dataclass(frozen=True)
class InnerSolution:
    solution: BeamformingSolution
    objective: float  # w1 * sum_rate + w2 * sensing objective
    state: BcdState
    converged: bool
    iterations: int


def initial_beams(scenario: Scenario, rotation: float, options: SolverOptions,
                  channels: np.ndarray | None = None) -> np.ndarray:
    if channels is None:
        channels = user_channels(scenario, rotation)
    p, k = scenario.power_budget, scenario.num_users
    if options.init_scheme == "random":
        rng = np.random.default_rng(options.seed)
        beams = rng.standard_normal(channels.shape) + 1j * rng.standard_normal(channels.shape)
        return beams * math.sqrt(p) / np.linalg.norm(beams)
    norms = np.linalg.norm(channels, axis=0)
    norms[norms == 0] = 1.0
    return channels / norms * math.sqrt(p / k)


def fp_bcd_solve(scenario: Scenario, rotation: float, weights: WeightPair,
                 options: SolverOptions | None = None, init_beams: np.ndarray | None = None) -> InnerSolution:
    """Run the block updates alpha -> b -> b_s -> w until the surrogate settles.

    ``init_beams`` overrides ``options.init_scheme`` (used for warm starts).
    The surrogate is recorded after every full sweep; convergence is a
    relative change below ``options.rel_tolerance``.
    """
    options = options or SolverOptions()
    p = _Problem.build(scenario, rotation, weights)
    if init_beams is None or not np.any(init_beams):
        init_beams = initial_beams(scenario, rotation, options, p.channels)
    state = BcdState.from_beams(init_beams)

    converged = False
    prev = None
    it = 0
    for it in range(1, options.max_bcd_iters + 1):
        _update_alpha(p, state)
        _update_b(p, state)
        _update_bs(p, state)
        _update_w(p, state, options.mu_tolerance, options.mu_max_iters)
        value = _surrogate(p, state)
        state.objective_trace.append(value)
        if prev is not None and abs(value - prev) <= options.rel_tolerance * max(abs(prev), 1e-12):
            converged = True
            break
        prev = value
    if not converged:
        log.warning("BCD stopped at the %d-iteration cap before converging", options.max_bcd_iters)

    solution = BeamformingSolution(state.beams)
    objective = 0.0
    if weights.comm_weight:
        objective += weights.comm_weight * sum_rate(scenario, state.beams, rotation, p.channels)
    if weights.sense_weight:
        objective += weights.sense_weight * sensing_objective(solution, scenario, rotation)
    return InnerSolution(solution, objective, state, converged, it)


def mrt_beams(scenario: Scenario, user_index: int, rotation: float, power: float | None = None) -> np.ndarray:
    """Maximum-ratio beam ``sqrt(P) h / ||h||`` for one user."""
    power = scenario.power_budget if power is None else power
    if not 0 <= user_index < scenario.num_users:
        raise IndexError(f"user_index {user_index} out of range for K={scenario.num_users}")
    h = user_channels(scenario, rotation)[:, user_index]
    norm = np.linalg.norm(h)
    if norm == 0:
        raise ValueError(f"user {user_index} has an all-zero channel")
    return math.sqrt(power) * h / norm


def zf_beams(scenario: Scenario, rotation: float, power: float | None = None,
             channels: np.ndarray | None = None) -> np.ndarray:
    """Zero-forcing beams (columns), each normalised to power ``P / K``."""
    power = scenario.power_budget if power is None else power
    if channels is None:
        channels = user_channels(scenario, rotation)
    m, k = channels.shape
    if k > m:
        raise SingularChannelError(f"zero forcing needs K <= M_t, got K={k}, M_t={m}")
    sv = np.linalg.svd(channels, compute_uv=False)
    if sv[0] == 0 or sv[-1] < 1e-10 * sv[0]:
        raise SingularChannelError("user channel matrix is rank deficient")
    directions = np.linalg.pinv(channels.conj().T)  # (M, K); h_k^H w_i = delta_ki
    directions /= np.linalg.norm(directions, axis=0)
    return directions * math.sqrt(power / k)


def sensing_optimal_covariance(scenario: Scenario, rotation: float, power: float | None = None) -> BeamformingSolution:
    """Single beam ``sqrt(P/M_t) a_T(theta~)``, i.e. ``W = (P/M_t) a_T a_T^H``."""
    power = scenario.power_budget if power is None else power
    a = steering_vector(scenario.tx_geometry, scenario.target.nominal_angle + rotation)
    return BeamformingSolution(math.sqrt(power / scenario.tx_geometry.num_elements) * a)
