"""Ground-truth scenario generation and measurement synthesis.

Two trajectory generators share one integrator: the target accelerates
toward its active waypoint under the leader-feedback law (acceleration =
reversion * (waypoint - position) - damping * velocity) with white
dynamical noise, and a fast manoeuvring variant additionally kicks the
velocity with Gaussian jumps at gamma-renewal times. Waypoints are
captured within a radius and the track ends when the last one is reached
(or a duration cap fires).

Propagation uses the exact discretised transition of the feedback law per
axis, so the simulated tracks follow the same stochastic dynamics the
tracking models assume between waypoint switches.

Measurements are noisy positions on a regular or jittered schedule; truth
at arbitrary query times is linearly interpolated from the fine
integration grid, which contains every manoeuvre time exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DimensionError
from .sde import expm, process_covariance


class GeneratorKind(enum.Enum):
    """Which trajectory generator a scenario uses."""

    WAYPOINT_CV = "waypoint_cv"
    JUMP_DIFFUSION_TARGET = "jump_diffusion_target"


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything a scenario needs: field, dynamics, sensor, schedule.

    Attributes:
        dims: Spatial dimensions (1 to 3).
        n_waypoints: Waypoints per track; the benchmark draws 3 to 5.
        bounds: Field of coverage, shape (dims, 2) rows of (low, high) m.
        sigma_dynamics: Velocity diffusion density (m/s per root second).
        sigma_measurement: Position measurement noise std (m).
        period: Nominal measurement period (s).
        jitter: Schedule jitter as a fraction of the period, in [0, 1).
        generator: Trajectory generator kind.
        mu_jump: Mean of each velocity jump (fast manoeuvring generator).
        sigma_jump: Std of each velocity jump (fast manoeuvring generator).
        manoeuvre_shape: Gamma shape of the velocity-jump renewal gaps.
        manoeuvre_scale: Gamma scale of the velocity-jump renewal gaps (s).
        reversion: Pull rate toward the active waypoint (1/s^2): the
            acceleration gains reversion * (waypoint - position).
        damping: Velocity drag rate (1/s), which caps the approach speed.
        capture_radius: Waypoint capture distance (m).
        sim_step: Integration step (s).
        max_duration: Hard cap on track length (s).
        start: Optional fixed start position; drawn uniformly otherwise.
        seed: Default RNG seed used when no generator is passed in.
    """

    dims: int = 3
    n_waypoints: int = 4
    bounds: "np.ndarray | None" = None
    sigma_dynamics: float = 14.0
    sigma_measurement: float = 15.0
    period: float = 1.0
    jitter: float = 0.0
    generator: GeneratorKind = GeneratorKind.WAYPOINT_CV
    mu_jump: float = 0.0
    sigma_jump: float = 50.0
    manoeuvre_shape: float = 2.0
    manoeuvre_scale: float = 3.0
    reversion: float = 0.15
    damping: float = 0.8
    capture_radius: float = 20.0
    sim_step: float = 0.02
    max_duration: float = 600.0
    start: "np.ndarray | None" = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dims < 1:
            raise ContractViolationError("dims must be at least 1")
        if self.n_waypoints < 1:
            raise ContractViolationError("need at least one waypoint")
        bounds = self.bounds
        if bounds is None:
            bounds = np.tile([0.0, 1000.0], (self.dims, 1))
        bounds = np.asarray(bounds, dtype=float)
        if bounds.shape != (self.dims, 2):
            raise DimensionError(f"bounds must have shape ({self.dims}, 2), got {bounds.shape}")
        if not np.all(bounds[:, 0] < bounds[:, 1]):
            raise ContractViolationError("bounds must be non-degenerate")
        for name in ("sigma_dynamics", "sigma_measurement", "mu_jump"):
            if not np.isfinite(getattr(self, name)):
                raise ContractViolationError(f"{name} must be finite")
        if self.sigma_dynamics < 0.0 or self.sigma_measurement < 0.0 or self.sigma_jump < 0.0:
            raise ContractViolationError("noise stds must be non-negative")
        if self.period <= 0.0 or self.sim_step <= 0.0 or self.max_duration <= 0.0:
            raise ContractViolationError("period, sim_step, and max_duration must be positive")
        if not 0.0 <= self.jitter < 1.0:
            raise ContractViolationError("jitter must lie in [0, 1)")
        if self.manoeuvre_shape <= 0.0 or self.manoeuvre_scale <= 0.0:
            raise ContractViolationError("manoeuvre renewal parameters must be positive")
        if not (np.isfinite(self.reversion) and self.reversion > 0.0):
            raise ContractViolationError("reversion must be finite and positive")
        if not (np.isfinite(self.damping) and self.damping >= 0.0):
            raise ContractViolationError("damping must be finite and non-negative")
        if self.capture_radius <= 0.0:
            raise ContractViolationError("capture_radius must be positive")
        object.__setattr__(self, "bounds", bounds)
        if self.start is not None:
            start = np.asarray(self.start, dtype=float).reshape(-1)
            if start.size != self.dims:
                raise DimensionError(f"start must have {self.dims} coordinates")
            object.__setattr__(self, "start", start)


@dataclass(frozen=True)
class Trajectory:
    """One simulated track with its intent ground truth.

    Attributes:
        times: Strictly increasing integration timestamps, shape (T,).
        positions: True positions, shape (T, dims).
        velocities: True velocities, shape (T, dims).
        waypoints: Waypoint coordinates in visiting order, shape (N, dims).
        switch_times: Times at which the active waypoint changed (capture
            of all but the final waypoint), ascending.
        active_index: Index of the pursued waypoint per step, shape (T,).
        manoeuvre_times: Velocity-jump times (fast manoeuvring generator).
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    waypoints: np.ndarray
    switch_times: tuple[float, ...]
    active_index: np.ndarray
    manoeuvre_times: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise DimensionError("a trajectory needs at least two timestamps")
        if not np.all(np.diff(times) > 0.0):
            raise ContractViolationError("timestamps must be strictly increasing")
        if self.positions.shape != (times.size, self.waypoints.shape[1]):
            raise DimensionError("positions do not match times and waypoint dimension")

    @property
    def dims(self) -> int:
        return self.waypoints.shape[1]

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def state_at(self, query: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Interpolated truth (positions, velocities, active index) at query times."""
        query = np.atleast_1d(np.asarray(query, dtype=float))
        if np.any(query < self.times[0]) or np.any(query > self.times[-1]):
            raise ContractViolationError("query times fall outside the trajectory")
        positions = np.column_stack(
            [np.interp(query, self.times, self.positions[:, a]) for a in range(self.dims)]
        )
        velocities = np.column_stack(
            [np.interp(query, self.times, self.velocities[:, a]) for a in range(self.dims)]
        )
        active = np.searchsorted(np.asarray(self.switch_times), query, side="right")
        active = np.minimum(active, self.waypoints.shape[0] - 1)
        return positions, velocities, active

    def active_waypoints(self, query: np.ndarray) -> np.ndarray:
        """Position of the pursued waypoint at each query time."""
        _, _, active = self.state_at(query)
        return self.waypoints[active]


def _sample_waypoints(config: ScenarioConfig, start: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform waypoints, re-drawn to keep consecutive legs non-degenerate."""
    low, high = config.bounds[:, 0], config.bounds[:, 1]
    waypoints = np.empty((config.n_waypoints, config.dims))
    previous = start
    for k in range(config.n_waypoints):
        for _ in range(1000):
            candidate = rng.uniform(low, high)
            if np.linalg.norm(candidate - previous) > 2.0 * config.capture_radius:
                break
        waypoints[k] = candidate
        previous = candidate
    return waypoints


def _axis_kernel(config: ScenarioConfig, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact one-step transition of [position, velocity, waypoint] per axis.

    Returns:
        (F, C) with F the (3, 3) transition matrix and C the (2, 2)
        Cholesky factor of the noise covariance on [position, velocity]
        (zero matrix when the scenario is noiseless).
    """
    drift = np.array(
        [
            [0.0, 1.0, 0.0],
            [-config.reversion, -config.damping, config.reversion],
            [0.0, 0.0, 0.0],
        ]
    )
    transition = expm(drift, dt)
    if config.sigma_dynamics == 0.0:
        return transition, np.zeros((2, 2))
    noise_cov = process_covariance(
        drift, np.array([0.0, config.sigma_dynamics, 0.0]), dt
    )
    return transition, np.linalg.cholesky(noise_cov[:2, :2])


def simulate(config: ScenarioConfig, rng: "np.random.Generator | None" = None) -> Trajectory:
    """Generate one ground-truth track.

    Each axis carries [position, velocity, waypoint] and evolves by the
    exact discretised leader-feedback transition with the active waypoint
    held fixed between captures; capture swaps in the next waypoint. The
    fast manoeuvring generator additionally applies per-axis
    Normal(mu_jump, sigma_jump^2) velocity kicks at gamma-renewal times,
    which appear as exact grid points.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    low, high = config.bounds[:, 0], config.bounds[:, 1]
    start = config.start if config.start is not None else rng.uniform(low, high)
    waypoints = _sample_waypoints(config, start, rng)

    kicks: list[float] = []
    if config.generator is GeneratorKind.JUMP_DIFFUSION_TARGET:
        t_kick = float(rng.gamma(config.manoeuvre_shape, config.manoeuvre_scale))
        while t_kick < config.max_duration:
            kicks.append(t_kick)
            t_kick += float(rng.gamma(config.manoeuvre_shape, config.manoeuvre_scale))
    kick_iter = iter(kicks + [math.inf])
    next_kick = next(kick_iter)

    # Rows are axes, columns are [position, velocity, waypoint].
    state = np.zeros((config.dims, 3))
    state[:, 0] = start
    state[:, 2] = waypoints[0]

    step_kernel = _axis_kernel(config, config.sim_step)
    times = [0.0]
    positions = [state[:, 0].copy()]
    velocities = [state[:, 1].copy()]
    active_index = [0]
    switch_times: list[float] = []
    applied_kicks: list[float] = []
    active = 0
    t = 0.0

    while t < config.max_duration:
        t_next = min(t + config.sim_step, next_kick, config.max_duration)
        dt = t_next - t
        transition, chol = step_kernel if dt == config.sim_step else _axis_kernel(config, dt)
        state = state @ transition.T
        if config.sigma_dynamics > 0.0:
            state[:, :2] += rng.standard_normal((config.dims, 2)) @ chol.T
        t = t_next
        if t == next_kick:
            state[:, 1] += rng.normal(config.mu_jump, config.sigma_jump, config.dims)
            applied_kicks.append(t)
            next_kick = next(kick_iter)
        times.append(t)
        positions.append(state[:, 0].copy())
        velocities.append(state[:, 1].copy())
        captured = np.linalg.norm(state[:, 0] - waypoints[active]) < config.capture_radius
        final = active == config.n_waypoints - 1
        if captured and not final:
            active += 1
            state[:, 2] = waypoints[active]
            switch_times.append(t)
        active_index.append(active)
        if captured and final:
            break

    return Trajectory(
        times=np.array(times),
        positions=np.array(positions),
        velocities=np.array(velocities),
        waypoints=waypoints,
        switch_times=tuple(switch_times),
        active_index=np.array(active_index, dtype=int),
        manoeuvre_times=tuple(applied_kicks),
    )


def measurement_schedule(
    traj: Trajectory, config: ScenarioConfig, rng: "np.random.Generator | None" = None
) -> np.ndarray:
    """Measurement times over the track: regular, optionally jittered.

    The first time is the track start; later times sit on the period grid
    plus, when configured, a uniform jitter of up to half a period each
    way, which keeps the ordering strict. Times beyond the track end are
    dropped.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    base = np.arange(traj.times[0], traj.times[-1] + 1e-9, config.period)
    if config.jitter > 0.0 and base.size > 1:
        offsets = config.jitter * config.period * (rng.random(base.size - 1) - 0.5)
        base = np.concatenate([base[:1], base[1:] + offsets])
    return base[base <= traj.times[-1]]


def synthesize_measurements(
    traj: Trajectory, config: ScenarioConfig, rng: "np.random.Generator | None" = None
) -> tuple[np.ndarray, np.ndarray]:
    """Noisy position measurements of a track on its schedule.

    Returns:
        (times, measurements) with measurements of shape (T, dims): true
        interpolated positions plus i.i.d. Gaussian noise per axis.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    times = measurement_schedule(traj, config, rng)
    positions, _, _ = traj.state_at(times)
    noise = config.sigma_measurement * rng.standard_normal(positions.shape)
    return times, positions + noise


def position_rmse(estimates: np.ndarray, truth: np.ndarray) -> float:
    """Root mean squared Euclidean error of a point-estimate sequence."""
    estimates = np.atleast_2d(np.asarray(estimates, dtype=float))
    truth = np.atleast_2d(np.asarray(truth, dtype=float))
    if estimates.shape != truth.shape:
        raise DimensionError(f"shapes {estimates.shape} and {truth.shape} do not match")
    return float(np.sqrt(np.mean(np.sum((estimates - truth) ** 2, axis=1))))
