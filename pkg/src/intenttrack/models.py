"""Virtual-leader motion models conditioned on latent intent.

Each axis carries the state [position, velocity, leader offset]: velocity
is pulled toward a latent leader coordinate (the intended destination) and
damped, while the leader itself evolves by diffusion, by Gaussian jumps at
renewal times, or by resets onto nominated destinations, depending on the
model kind. Conditioned on the jump history every kind is linear-Gaussian,
and this module produces those conditional transitions in F-form for the
Kalman machinery.

Model kinds:
    BASELINE            leader diffuses, no jumps.
    PIECEWISE_CONSTANT  leader is constant between Gaussian jumps.
    JUMP_DIFFUSION      leader diffuses and jumps.
    FAST_MANOEUVRING    velocity jumps, leader diffuses.
    MULTI_HYPOTHESIS    piecewise-constant leader whose jumps either draw a
                        generic Gaussian move (null) or reset onto one of a
                        finite set of nominated destinations.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ContractViolationError, DimensionError
from .jumps import JumpPrior
from .sde import TransitionParams, expm, jump_contributions, process_covariance


class ModelKind(enum.Enum):
    BASELINE = "baseline"
    PIECEWISE_CONSTANT = "piecewise_constant"
    JUMP_DIFFUSION = "jump_diffusion"
    FAST_MANOEUVRING = "fast_manoeuvring"
    MULTI_HYPOTHESIS = "multi_hypothesis"


_JUMPY_KINDS = (
    ModelKind.PIECEWISE_CONSTANT,
    ModelKind.JUMP_DIFFUSION,
    ModelKind.FAST_MANOEUVRING,
    ModelKind.MULTI_HYPOTHESIS,
)
# Kinds whose leader coordinate carries no diffusion of its own.
_FROZEN_LEADER_KINDS = (ModelKind.PIECEWISE_CONSTANT, ModelKind.MULTI_HYPOTHESIS)


@dataclass(frozen=True)
class ModelParams:
    """Continuous-time parameters shared by all model kinds.

    Attributes:
        reversion: Pull of velocity toward the leader offset, 1/s^2.
        damping: Velocity damping rate, 1/s.
        sigma_motion: Velocity diffusion intensity, m/s^(3/2).
        sigma_intent: Leader diffusion intensity, m/s^(1/2); forced to zero
            for the kinds whose leader is piecewise constant.
        mu_jump: Mean jump size, m (or m/s for velocity jumps).
        sigma_jump: Jump size standard deviation.
        dims: Number of spatial axes, 1 to 3.
    """

    reversion: float
    damping: float
    sigma_motion: float
    sigma_intent: float = 0.0
    mu_jump: float = 0.0
    sigma_jump: float = 0.0
    dims: int = 1

    def __post_init__(self) -> None:
        for name in ("reversion", "damping", "sigma_motion", "sigma_intent", "sigma_jump"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ContractViolationError(f"{name} must be finite and non-negative, got {value}")
        if not math.isfinite(self.mu_jump):
            raise ContractViolationError("mu_jump must be finite")
        if self.dims not in (1, 2, 3):
            raise ContractViolationError(f"dims must be 1, 2, or 3, got {self.dims}")

    @property
    def state_dim(self) -> int:
        return 3 * self.dims


@dataclass(frozen=True)
class DestinationSet:
    """Nominated destinations for the multiple-hypothesis model.

    Indicator 0 is the null hypothesis (a generic Gaussian leader jump);
    indicator j >= 1 resets the leader onto ``positions[j - 1]`` with
    per-axis standard deviation ``extents[j - 1]``.

    Attributes:
        positions: Destination coordinates, shape (n_dest, dims).
        extents: Per-axis arrival spread, shape (n_dest, dims), >= 0.
        transition: Row-stochastic indicator transition matrix over the
            null hypothesis plus destinations, shape (n_dest+1, n_dest+1).
        initial: Prior over the indicator before the first jump,
            shape (n_dest+1,).
    """

    positions: np.ndarray
    extents: np.ndarray
    transition: np.ndarray
    initial: np.ndarray

    def __post_init__(self) -> None:
        positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        extents = np.atleast_2d(np.asarray(self.extents, dtype=float))
        transition = np.asarray(self.transition, dtype=float)
        initial = np.asarray(self.initial, dtype=float)
        if extents.shape != positions.shape:
            raise DimensionError(
                f"extents shape {extents.shape} does not match positions {positions.shape}"
            )
        if np.any(extents < 0.0):
            raise ContractViolationError("extents must be non-negative")
        k = positions.shape[0] + 1
        if transition.shape != (k, k):
            raise DimensionError(f"transition must be {k}x{k}, got {transition.shape}")
        if np.any(transition < 0.0) or np.abs(transition.sum(axis=1) - 1.0).max() > 1e-9:
            raise ContractViolationError("transition rows must be probability vectors")
        if initial.shape != (k,) or np.any(initial < 0.0) or abs(initial.sum() - 1.0) > 1e-9:
            raise ContractViolationError("initial must be a probability vector over indicators")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "transition", transition)
        object.__setattr__(self, "initial", initial)

    @property
    def n_destinations(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class ConditionalGaussian:
    """A transition density N(mean, cov) for the next state."""

    mean: np.ndarray
    cov: np.ndarray


def build_system_matrices(
    kind: ModelKind, params: ModelParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Stacked continuous-time system for a model kind.

    Args:
        kind: Model kind.
        params: Model parameters.

    Returns:
        Tuple (A, L, h_jump, h_motion):
        A is the (3d, 3d) drift matrix, block diagonal over axes;
        L is the (3d, 2d) diffusion input with one velocity and one leader
        noise column per axis (leader column zero for piecewise-constant
        kinds); h_jump is the (3d, d) jump direction per axis (zero for the
        baseline); h_motion is the (3d, d) velocity noise column per axis.
    """
    d = params.dims
    axis_drift = np.array(
        [
            [0.0, 1.0, 0.0],
            [-params.reversion, -params.damping, params.reversion],
            [0.0, 0.0, 0.0],
        ]
    )
    A = scipy.linalg.block_diag(*[axis_drift] * d)
    sigma_intent = 0.0 if kind in _FROZEN_LEADER_KINDS else params.sigma_intent
    axis_noise = np.array([[0.0, 0.0], [params.sigma_motion, 0.0], [0.0, sigma_intent]])
    L = scipy.linalg.block_diag(*[axis_noise] * d)
    h_jump = np.zeros((3 * d, d))
    if kind in _JUMPY_KINDS:
        row = 1 if kind is ModelKind.FAST_MANOEUVRING else 2
        for a in range(d):
            h_jump[3 * a + row, a] = 1.0
    h_motion = np.zeros((3 * d, d))
    for a in range(d):
        h_motion[3 * a + 1, a] = params.sigma_motion
    return A, L, h_jump, h_motion


def _segment_params(
    A: np.ndarray,
    L: np.ndarray,
    h_jump: np.ndarray,
    params: ModelParams,
    t_start: float,
    t_end: float,
    jump_times: "list[float]",
) -> TransitionParams:
    """F-form transition over (t_start, t_end] with in-segment Gaussian jumps."""
    F = expm(A, t_end - t_start)
    Q = process_covariance(A, L, t_end - t_start)
    offset, jump_cov = jump_contributions(
        A, h_jump, jump_times, t_end, params.mu_jump, params.sigma_jump, t_start=t_start
    )
    return TransitionParams(F, offset, Q + jump_cov)


def _checked_window(window: tuple[float, float]) -> tuple[float, float]:
    t_start, t_end = float(window[0]), float(window[1])
    if not t_start < t_end:
        raise ContractViolationError(f"window start {t_start} must precede end {t_end}")
    return t_start, t_end


def window_transition(
    kind: ModelKind,
    params: ModelParams,
    window: tuple[float, float],
    jump_times: "list[float]" = (),
) -> TransitionParams:
    """Conditional window transition in F-form, given the in-window jumps.

    Args:
        kind: Any kind except MULTI_HYPOTHESIS (whose events carry
            indicators; see :func:`multihypo_window_transition`).
        params: Model parameters.
        window: (t_start, t_end) measurement window.
        jump_times: Jump times inside the window; must be empty for the
            baseline kind.

    Returns:
        TransitionParams so that s_end = F s_start + offset + w.
    """
    if kind is ModelKind.MULTI_HYPOTHESIS:
        raise ContractViolationError("multi-hypothesis transitions need indicator events")
    t_start, t_end = _checked_window(window)
    jump_times = list(jump_times)
    if kind is ModelKind.BASELINE and jump_times:
        raise ContractViolationError("the baseline kind admits no jumps")
    A, L, h_jump, _ = build_system_matrices(kind, params)
    return _segment_params(A, L, h_jump, params, t_start, t_end, jump_times)


def transition_density(
    kind: ModelKind,
    params: ModelParams,
    s_prev: np.ndarray,
    window: tuple[float, float],
    jump_times: "list[float]" = (),
) -> ConditionalGaussian:
    """Conditional density of the state at the window end.

    Args:
        kind: Model kind (not MULTI_HYPOTHESIS).
        params: Model parameters.
        s_prev: State at the window start, shape (3 * dims,).
        window: (t_start, t_end) measurement window.
        jump_times: Jump times inside the window.

    Returns:
        The Gaussian N(F s_prev + offset, Q).
    """
    s_prev = np.asarray(s_prev, dtype=float)
    if s_prev.shape != (params.state_dim,):
        raise DimensionError(f"state must have shape ({params.state_dim},), got {s_prev.shape}")
    trans = window_transition(kind, params, window, jump_times)
    return ConditionalGaussian(trans.F @ s_prev + trans.offset, trans.Q)


def _reset_step(
    params: ModelParams, destinations: DestinationSet, indicator: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Instantaneous reset (F, offset, Q) pinning the leader on a destination."""
    d = params.dims
    F = np.eye(3 * d)
    offset = np.zeros(3 * d)
    Q = np.zeros((3 * d, 3 * d))
    leader = 3 * np.arange(d) + 2
    F[leader, leader] = 0.0
    offset[leader] = destinations.positions[indicator - 1]
    Q[leader, leader] = destinations.extents[indicator - 1] ** 2
    return F, offset, Q


def multihypo_window_transition(
    params: ModelParams,
    destinations: DestinationSet,
    events: "list[tuple[float, int]]",
    window: tuple[float, float],
) -> TransitionParams:
    """F-form window transition for the multiple-hypothesis model.

    Null events (indicator 0) act as generic Gaussian leader jumps exactly
    as in the piecewise-constant kind. Destination events replace the
    leader with a draw around the nominated destination; each event is
    applied at its own time and propagated to the window end by the
    remaining diffusion segments, so a window with only null events reduces
    to the piecewise-constant transition identically.

    Args:
        params: Model parameters (leader diffusion is forced off).
        destinations: Nominated destinations and indicator priors.
        events: (time, indicator) pairs, strictly increasing times inside
            the window, indicators in 0..n_destinations.
        window: (t_start, t_end) measurement window.

    Returns:
        TransitionParams so that s_end = F s_start + offset + w.
    """
    t_start, t_end = _checked_window(window)
    if destinations.positions.shape[1] != params.dims:
        raise DimensionError(
            f"destinations have {destinations.positions.shape[1]} axes, model has {params.dims}"
        )
    kind = ModelKind.MULTI_HYPOTHESIS
    A, L, h_jump, _ = build_system_matrices(kind, params)
    last_time = t_start
    for time, indicator in events:
        if not last_time < time <= t_end:
            raise ContractViolationError(
                f"event time {time} breaks the ordering inside ({t_start}, {t_end}]"
            )
        if not 0 <= indicator <= destinations.n_destinations:
            raise ContractViolationError(f"indicator {indicator} has no destination")
        last_time = time

    n = params.state_dim
    F_acc = np.eye(n)
    offset_acc = np.zeros(n)
    Q_acc = np.zeros((n, n))
    applied_any = False

    def absorb(trans: TransitionParams) -> None:
        nonlocal F_acc, offset_acc, Q_acc
        F_acc = trans.F @ F_acc
        offset_acc = trans.F @ offset_acc + trans.offset
        Q_acc = trans.F @ Q_acc @ trans.F.T + trans.Q

    seg_start = t_start
    null_times: list[float] = []
    for time, indicator in events:
        if indicator == 0:
            null_times.append(time)
            continue
        absorb(_segment_params(A, L, h_jump, params, seg_start, time, null_times))
        absorb(TransitionParams(*_reset_step(params, destinations, indicator)))
        applied_any = True
        seg_start = time
        null_times = []
    tail = _segment_params(A, L, h_jump, params, seg_start, t_end, null_times)
    if not applied_any:
        # Whole window is one piecewise-constant segment; return it directly
        # so the all-null case is bit-identical to the plain transition.
        return tail
    absorb(tail)
    return TransitionParams(F_acc, offset_acc, 0.5 * (Q_acc + Q_acc.T))


def multihypo_transition(
    params: ModelParams,
    destinations: DestinationSet,
    s_prev: np.ndarray,
    events: "list[tuple[float, int]]",
    window: tuple[float, float],
) -> ConditionalGaussian:
    """Conditional density of the multiple-hypothesis state at the window end."""
    s_prev = np.asarray(s_prev, dtype=float)
    if s_prev.shape != (params.state_dim,):
        raise DimensionError(f"state must have shape ({params.state_dim},), got {s_prev.shape}")
    trans = multihypo_window_transition(params, destinations, events, window)
    return ConditionalGaussian(trans.F @ s_prev + trans.offset, trans.Q)


@dataclass(frozen=True)
class IntentModel:
    """A model kind bundled with its parameters and jump machinery.

    This is the object the filter, simulator, and CLI pass around: it owns
    the stacked system matrices and knows which state coordinates carry
    position, velocity, and intent.

    Attributes:
        kind: Model kind.
        params: Continuous-time parameters.
        jump_prior: Inter-arrival prior; required for jumpy kinds and
            rejected for the baseline.
        destinations: Destination set; required for MULTI_HYPOTHESIS only.
    """

    kind: ModelKind
    params: ModelParams
    jump_prior: "JumpPrior | None" = None
    destinations: "DestinationSet | None" = None

    def __post_init__(self) -> None:
        if self.kind in _JUMPY_KINDS and self.jump_prior is None:
            raise ContractViolationError(f"{self.kind.value} requires a jump prior")
        if self.kind is ModelKind.BASELINE and self.jump_prior is not None:
            raise ContractViolationError("the baseline kind admits no jump prior")
        if self.kind is ModelKind.MULTI_HYPOTHESIS:
            if self.destinations is None:
                raise ContractViolationError("multi_hypothesis requires a destination set")
            if self.destinations.positions.shape[1] != self.params.dims:
                raise DimensionError(
                    f"destinations have {self.destinations.positions.shape[1]} axes,"
                    f" model has {self.params.dims}"
                )
        elif self.destinations is not None:
            raise ContractViolationError(f"{self.kind.value} does not take destinations")
        A, L, h_jump, h_motion = build_system_matrices(self.kind, self.params)
        object.__setattr__(self, "_matrices", (A, L, h_jump, h_motion))

    @property
    def matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """The cached (A, L, h_jump, h_motion) stack."""
        return self._matrices  # type: ignore[attr-defined]

    @property
    def dims(self) -> int:
        return self.params.dims

    @property
    def state_dim(self) -> int:
        return self.params.state_dim

    @property
    def position_indices(self) -> np.ndarray:
        return 3 * np.arange(self.dims)

    @property
    def velocity_indices(self) -> np.ndarray:
        return 3 * np.arange(self.dims) + 1

    @property
    def intent_indices(self) -> np.ndarray:
        return 3 * np.arange(self.dims) + 2

    def window_transition(
        self, window: tuple[float, float], events: "list[tuple[float, int | None]]" = ()
    ) -> TransitionParams:
        """Window transition for this model given (time, indicator) events."""
        if self.kind is ModelKind.MULTI_HYPOTHESIS:
            assert self.destinations is not None
            return multihypo_window_transition(
                self.params, self.destinations, [(t, c) for t, c in events], window
            )
        return window_transition(self.kind, self.params, window, [t for t, _ in events])
