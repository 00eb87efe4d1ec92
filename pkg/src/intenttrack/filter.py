"""Rao-Blackwellised variable-rate particle filter.

Particles carry only the discrete part of the problem: a jump history
(times, plus hypothesis indicators for the multiple-hypothesis model) and
an exact Gaussian belief over the kinematic state conditioned on that
history. Between measurements each particle extends its history from the
renewal prior, pushes its belief through the conditional window transition,
and reweights by the Gaussian predictive likelihood of the new measurement.
Resampling is systematic and triggered by the effective sample size.

Beliefs for the whole particle bank are stored as stacked arrays and
propagated with broadcast linear algebra; the per-belief functions in
``kalman`` define the semantics and the tests pin the two paths together.

Randomness is drawn from streams keyed by (seed, step, purpose, particle),
so results are bit-reproducible regardless of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from .errors import ContractViolationError, DimensionError, FilterDegenerateError, NumericError
from .jumps import JumpSequence, first_arrival_times, sample_indicator
from .kalman import GaussianBelief, ObservationModel
from .kalman import predict as kalman_predict, update as kalman_update
from .models import IntentModel, ModelKind, multihypo_window_transition
from .sde import jump_contributions

# Purpose tags for the keyed RNG streams.
_RNG_INIT = 0
_RNG_PROPOSE = 1
_RNG_RESAMPLE = 2


def _stream(seed: int, step: int, purpose: int, particle: "int | None" = None) -> np.random.Generator:
    key = [seed, step, purpose] if particle is None else [seed, step, purpose, particle]
    return np.random.default_rng(key)


@dataclass(frozen=True)
class Particle:
    """One particle: normalised weight, jump history, conditional belief."""

    log_weight: float
    jumps: JumpSequence
    belief: GaussianBelief


@dataclass(frozen=True)
class GaussianMixture:
    """Weighted Gaussian mixture over the full state.

    Attributes:
        weights: Component weights summing to 1, shape (k,).
        means: Component means, shape (k, n).
        covs: Component covariances, shape (k, n, n).
    """

    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray

    @property
    def components(self) -> list[tuple[float, np.ndarray, np.ndarray]]:
        return [
            (float(w), self.means[i], self.covs[i]) for i, w in enumerate(self.weights)
        ]

    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def cov(self) -> np.ndarray:
        """Total covariance (within-component plus between-component spread)."""
        mu = self.mean()
        centred = self.means - mu
        spread = (centred * self.weights[:, None]).T @ centred
        return np.einsum("k,kij->ij", self.weights, self.covs) + spread

    def marginal(self, indices: np.ndarray) -> "GaussianMixture":
        idx = np.asarray(indices, dtype=int)
        return GaussianMixture(
            self.weights, self.means[:, idx], self.covs[:, idx[:, None], idx[None, :]]
        )


@dataclass(frozen=True)
class ParticleSet:
    """The filter state after some number of assimilation steps.

    Log weights are kept normalised (logsumexp equals zero). ``last_ess``
    and ``last_resampled`` describe the most recent step.
    """

    seed: int
    ess_threshold: float
    step_index: int
    t: float
    log_weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    jumps: tuple[JumpSequence, ...]
    last_ess: float
    last_resampled: bool = False

    @property
    def n_particles(self) -> int:
        return self.log_weights.size

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    @property
    def particles(self) -> list[Particle]:
        return [
            Particle(float(self.log_weights[i]), self.jumps[i], GaussianBelief(self.means[i], self.covs[i]))
            for i in range(self.n_particles)
        ]


def init(
    model: IntentModel,
    prior_belief: GaussianBelief,
    n_particles: int,
    ess_threshold: float = 0.5,
    seed: int = 0,
    t0: float = 0.0,
) -> ParticleSet:
    """Create the initial particle set at time t0.

    All particles share the prior belief and an empty jump history anchored
    at t0; multiple-hypothesis particles additionally draw their initial
    indicator from the destination set's prior.

    Args:
        model: The motion model the filter will condition on.
        prior_belief: Gaussian prior over the full state.
        n_particles: Number of particles, >= 1.
        ess_threshold: Resample when ESS falls below this fraction of the
            particle count; 0 disables resampling, 1 resamples every step.
        seed: Root seed of all randomness consumed by this filter run.
        t0: Time of the prior, used as the jump-history anchor.

    Returns:
        The initial ParticleSet with uniform weights.
    """
    if prior_belief.dim != model.state_dim:
        raise DimensionError(
            f"prior has dimension {prior_belief.dim}, model needs {model.state_dim}"
        )
    if n_particles < 1:
        raise ContractViolationError("need at least one particle")
    if not 0.0 <= ess_threshold <= 1.0:
        raise ContractViolationError(f"ess_threshold must lie in [0, 1], got {ess_threshold}")
    histories = []
    for i in range(n_particles):
        c0 = None
        if model.kind is ModelKind.MULTI_HYPOTHESIS:
            assert model.destinations is not None
            prior = model.destinations.initial
            c0 = int(_stream(seed, 0, _RNG_INIT, i).choice(prior.size, p=prior))
        histories.append(JumpSequence(t0, c0=c0))
    n = model.state_dim
    return ParticleSet(
        seed=seed,
        ess_threshold=float(ess_threshold),
        step_index=0,
        t=float(t0),
        log_weights=np.full(n_particles, -math.log(n_particles)),
        means=np.tile(prior_belief.mean, (n_particles, 1)),
        covs=np.tile(prior_belief.cov, (n_particles, 1, 1)),
        jumps=tuple(histories),
        last_ess=float(n_particles),
    )


def ess(weights: np.ndarray) -> float:
    """Effective sample size 1 / sum(w^2) of normalised weights.

    Raises:
        ContractViolationError: If the weights do not sum to 1.
    """
    weights = np.asarray(weights, dtype=float)
    if abs(weights.sum() - 1.0) > 1e-9 or np.any(weights < 0.0):
        raise ContractViolationError("weights must be normalised and non-negative")
    return float(1.0 / np.sum(weights**2))


def _systematic_offspring(weights: np.ndarray, u: float) -> np.ndarray:
    """Systematic resampling indices for one uniform draw u in [0, 1)."""
    n = weights.size
    positions = (np.arange(n) + u) / n
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    return np.searchsorted(cumulative, positions, side="left")


def resample_if_needed(pset: ParticleSet) -> ParticleSet:
    """Systematically resample when the last ESS is below the threshold.

    Offspring counts are unbiased (expected count equals n * weight) and
    weights reset to uniform, which is exactly the selection-weight
    bookkeeping the next step's weight update assumes. Returns the set
    unchanged when the ESS is high enough.
    """
    n = pset.n_particles
    if pset.last_ess >= pset.ess_threshold * n:
        return pset
    u = float(_stream(pset.seed, pset.step_index, _RNG_RESAMPLE).random())
    idx = _systematic_offspring(np.exp(pset.log_weights), u)
    return replace(
        pset,
        log_weights=np.full(n, -math.log(n)),
        means=pset.means[idx].copy(),
        covs=pset.covs[idx].copy(),
        jumps=tuple(pset.jumps[i] for i in idx),
        last_resampled=True,
    )


def _propose_events(
    model: IntentModel, pset: ParticleSet, window: tuple[float, float]
) -> list[list[tuple[float, "int | None"]]]:
    """Prior-proposal jump events for every particle over one window.

    First-arrival uniforms come from one batched stream indexed by particle
    slot; a per-particle stream is opened only for the (rare) particles
    whose first arrival lands inside the window, to draw follow-up gaps and
    hypothesis indicators.
    """
    t_start, t_end = window
    n = pset.n_particles
    if model.kind is ModelKind.BASELINE:
        return [[] for _ in range(n)]
    assert model.jump_prior is not None
    step_idx = pset.step_index + 1
    uniforms = _stream(pset.seed, step_idx, _RNG_PROPOSE).random(n)
    last = np.array([seq.last_jump_time for seq in pset.jumps])
    # One batched inverse-CDF draw covers the common no-jump case.
    first = first_arrival_times(model.jump_prior, last, t_start, uniforms)
    events: list[list[tuple[float, "int | None"]]] = []
    multi = model.kind is ModelKind.MULTI_HYPOTHESIS
    for i in range(n):
        t = float(first[i])
        if not t <= t_end:
            events.append([])
            continue
        rng = _stream(pset.seed, step_idx, _RNG_PROPOSE, i)
        mine: list[tuple[float, "int | None"]] = []
        c_prev = pset.jumps[i].last_indicator
        while t <= t_end:
            c = None
            if multi:
                assert model.destinations is not None
                c = sample_indicator(model.destinations.transition, int(c_prev), rng)
                c_prev = c
            mine.append((t, c))
            t += float(rng.gamma(model.jump_prior.shape, model.jump_prior.scale))
        events.append(mine)
    return events


def _bank_update(
    means: np.ndarray, covs: np.ndarray, obs: ObservationModel, measurement: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised Kalman update of the whole bank; returns log likelihoods."""
    H, R = obs.H, obs.R
    m = measurement
    HP = H @ covs
    S = HP @ H.T + R
    S = 0.5 * (S + S.transpose(0, 2, 1))
    chol = np.linalg.cholesky(S)
    innovation = m - means @ H.T
    gain = np.linalg.solve(S, HP).transpose(0, 2, 1)
    means_post = means + (gain @ innovation[..., None])[..., 0]
    closure = np.eye(means.shape[1]) - gain @ H
    covs_post = closure @ covs @ closure.transpose(0, 2, 1) + gain @ R @ gain.transpose(0, 2, 1)
    covs_post = 0.5 * (covs_post + covs_post.transpose(0, 2, 1))
    white = np.linalg.solve(S, innovation[..., None])[..., 0]
    log_det = 2.0 * np.log(np.diagonal(chol, axis1=1, axis2=2)).sum(axis=1)
    log_lik = -0.5 * (m.size * math.log(2.0 * math.pi) + log_det + (innovation * white).sum(axis=1))
    return means_post, covs_post, log_lik


def step(
    pset: ParticleSet,
    model: IntentModel,
    obs: ObservationModel,
    measurement: np.ndarray,
    t_new: float,
    proposal=None,
) -> ParticleSet:
    """Assimilate one measurement at time t_new.

    Proposes jump events from the renewal prior (or from ``proposal``),
    extends each particle's history, propagates its conditional belief, and
    reweights by the log predictive likelihood, so with the prior proposal
    the weight update is exactly the previous weight times the predictive
    density. Resampling runs afterwards if the ESS dropped below the
    threshold; the reported ESS is the pre-resampling one.

    Args:
        pset: Current particle set.
        model: Motion model (fixed across the run).
        obs: Measurement model.
        measurement: Measured vector at t_new.
        t_new: Measurement time, strictly after the set's current time.
        proposal: Optional override called as
            ``proposal(window, index, jumps, rng)`` returning the event list
            for one particle; used to condition on known jump sequences.

    Returns:
        The new ParticleSet at t_new.

    Raises:
        FilterDegenerateError: If every particle's weight collapsed.
    """
    if t_new <= pset.t:
        raise ContractViolationError(f"measurement time {t_new} does not advance {pset.t}")
    window = (pset.t, float(t_new))
    n = pset.n_particles
    measurement = np.asarray(measurement, dtype=float).reshape(-1)
    if measurement.size != obs.H.shape[0]:
        raise DimensionError(
            f"measurement has {measurement.size} coordinates, model expects {obs.H.shape[0]}"
        )
    if not np.all(np.isfinite(measurement)):
        raise NumericError("measurement contains non-finite values")

    if proposal is None:
        events = _propose_events(model, pset, window)
    else:
        events = [
            proposal(window, i, pset.jumps[i], _stream(pset.seed, pset.step_index + 1, _RNG_PROPOSE, i))
            for i in range(n)
        ]

    histories = []
    for i in range(n):
        seq = pset.jumps[i]
        for time, c in events[i]:
            seq = seq.extend(time, indicator=c)
        histories.append(seq)

    # Shared no-jump window transition; per-particle corrections on top.
    base = model.window_transition(window, [])
    A, _, h_jump, _ = model.matrices
    dim = model.state_dim
    offsets = np.tile(base.offset, (n, 1))
    means_pred = pset.means @ base.F.T
    covs_pred = base.F @ pset.covs @ base.F.T + base.Q
    for i in range(n):
        if not events[i]:
            continue
        if model.kind is ModelKind.MULTI_HYPOTHESIS and any(c >= 1 for _, c in events[i]):
            assert model.destinations is not None
            trans = multihypo_window_transition(
                model.params, model.destinations, events[i], window
            )
            means_pred[i] = trans.F @ pset.means[i]
            covs_pred[i] = trans.F @ pset.covs[i] @ trans.F.T + trans.Q
            offsets[i] = trans.offset
        else:
            jump_mean, jump_cov = jump_contributions(
                A,
                h_jump,
                [t for t, _ in events[i]],
                window[1],
                model.params.mu_jump,
                model.params.sigma_jump,
                t_start=window[0],
            )
            offsets[i] = jump_mean
            covs_pred[i] = covs_pred[i] + jump_cov
    means_pred += offsets
    covs_pred = 0.5 * (covs_pred + covs_pred.transpose(0, 2, 1))

    try:
        means_post, covs_post, log_lik = _bank_update(means_pred, covs_pred, obs, measurement)
        bad = ~np.isfinite(log_lik)
        if np.any(bad):
            log_lik = np.where(bad, -np.inf, log_lik)
            means_post[bad] = means_pred[bad]
            covs_post[bad] = covs_pred[bad]
    except np.linalg.LinAlgError:
        # At least one particle's innovation covariance failed; fall back to
        # per-particle updates and zero-weight the broken ones.
        means_post = means_pred.copy()
        covs_post = covs_pred.copy()
        log_lik = np.full(n, -np.inf)
        for i in range(n):
            try:
                belief, ll = kalman_update(
                    GaussianBelief(means_pred[i], covs_pred[i]), obs, measurement
                )
                means_post[i] = belief.mean
                covs_post[i] = belief.cov
                log_lik[i] = ll
            except NumericError:
                pass

    log_weights = pset.log_weights + log_lik
    norm = logsumexp(log_weights)
    if not np.isfinite(norm):
        raise FilterDegenerateError(f"all particle weights vanished at t={t_new}")
    log_weights = log_weights - norm

    out = ParticleSet(
        seed=pset.seed,
        ess_threshold=pset.ess_threshold,
        step_index=pset.step_index + 1,
        t=float(t_new),
        log_weights=log_weights,
        means=means_post,
        covs=covs_post,
        jumps=tuple(histories),
        last_ess=ess(np.exp(log_weights)),
        last_resampled=False,
    )
    return resample_if_needed(out)


def posterior_mixture(pset: ParticleSet) -> GaussianMixture:
    """The filtering posterior as a weighted Gaussian mixture."""
    return GaussianMixture(np.exp(pset.log_weights), pset.means.copy(), pset.covs.copy())


def map_jump_history(pset: ParticleSet) -> JumpSequence:
    """Jump history of the heaviest particle; ties resolve to the lowest index."""
    return pset.jumps[int(np.argmax(pset.log_weights))]


@dataclass(frozen=True)
class StepRecord:
    """Per-measurement diagnostics emitted by a filter run."""

    t: float
    mean: np.ndarray
    marginal_var: np.ndarray
    ess: float
    resampled: bool
    map_events: tuple[tuple[float, "int | None"], ...]


@dataclass(frozen=True)
class FilterRun:
    """A completed run: per-step records plus the final particle set."""

    records: list[StepRecord]
    final: "ParticleSet | None" = None


def position_observation(dims: int, sigma: float) -> ObservationModel:
    """Observation of every position coordinate with isotropic noise."""
    if dims < 1:
        raise DimensionError("dims must be at least 1")
    if sigma <= 0.0:
        raise ContractViolationError("measurement noise std must be positive")
    H = np.kron(np.eye(dims), np.array([[1.0, 0.0, 0.0]]))
    return ObservationModel(H=H, R=sigma**2 * np.eye(dims))


def initial_belief(
    model: IntentModel,
    obs: ObservationModel,
    first_measurement: np.ndarray,
    intent_prior_std: float = 1000.0,
    velocity_prior_std: float = 30.0,
) -> GaussianBelief:
    """Prior belief anchored on the first position measurement.

    Position takes the measurement with the measurement noise variance,
    velocity is zero-mean with a broad spread, and the intent coordinate is
    centred on the measurement with a configurable large variance.
    """
    m = np.asarray(first_measurement, dtype=float).reshape(-1)
    if m.size != model.dims:
        raise DimensionError(f"first measurement must have {model.dims} coordinates")
    mean = np.zeros(model.state_dim)
    var = np.zeros(model.state_dim)
    mean[model.position_indices] = m
    mean[model.intent_indices] = m
    var[model.position_indices] = np.diag(obs.R)
    var[model.velocity_indices] = velocity_prior_std**2
    var[model.intent_indices] = intent_prior_std**2
    return GaussianBelief(mean, np.diag(var))


def _mixture_record(pset: ParticleSet) -> StepRecord:
    mix = posterior_mixture(pset)
    mean = mix.mean()
    marginal_var = np.diag(mix.cov()).copy()
    return StepRecord(
        t=pset.t,
        mean=mean,
        marginal_var=marginal_var,
        ess=pset.last_ess,
        resampled=pset.last_resampled,
        map_events=tuple(map_jump_history(pset).events),
    )


def run_filter(
    model: IntentModel,
    obs: ObservationModel,
    times: np.ndarray,
    measurements: np.ndarray,
    n_particles: int,
    ess_threshold: float = 0.5,
    seed: int = 0,
    intent_prior_std: float = 1000.0,
    velocity_prior_std: float = 30.0,
    prior_belief: "GaussianBelief | None" = None,
    proposal=None,
    on_step=None,
) -> FilterRun:
    """Filter a whole measurement sequence.

    The first measurement seeds the prior belief (unless ``prior_belief``
    overrides it) and produces the first record; subsequent measurements
    are assimilated one step at a time. ``on_step`` (if given) is called
    with each post-step ParticleSet, which is how intent queries tap the
    per-step posterior.
    """
    times = np.asarray(times, dtype=float)
    measurements = np.atleast_2d(np.asarray(measurements, dtype=float))
    if measurements.shape[0] != times.size:
        raise DimensionError("times and measurements must align")
    belief = prior_belief
    if belief is None:
        belief = initial_belief(model, obs, measurements[0], intent_prior_std, velocity_prior_std)
    pset = init(model, belief, n_particles, ess_threshold, seed, t0=float(times[0]))
    records = [_mixture_record(pset)]
    if on_step is not None:
        on_step(pset)
    for k in range(1, times.size):
        pset = step(pset, model, obs, measurements[k], float(times[k]), proposal=proposal)
        records.append(_mixture_record(pset))
        if on_step is not None:
            on_step(pset)
    return FilterRun(records=records, final=pset)


def run_conditional_kalman(
    model: IntentModel,
    obs: ObservationModel,
    times: np.ndarray,
    measurements: np.ndarray,
    schedule,
    intent_prior_std: float = 1000.0,
    velocity_prior_std: float = 30.0,
    prior_belief: "GaussianBelief | None" = None,
    on_step=None,
) -> FilterRun:
    """Exact filter conditioned on a known jump schedule.

    ``schedule`` maps a window to its event list, either as a callable
    ``schedule(t_start, t_end) -> [(time, indicator), ...]`` or as a full
    event list filtered per window. This is the oracle path used when jump
    times (and destinations) are treated as known. ``on_step`` (if given)
    is called as ``on_step(t, belief)`` on the prior and after each update.
    """
    times = np.asarray(times, dtype=float)
    measurements = np.atleast_2d(np.asarray(measurements, dtype=float))
    if measurements.shape[0] != times.size:
        raise DimensionError("times and measurements must align")
    if not callable(schedule):
        fixed = sorted(schedule, key=lambda event: event[0])

        def schedule(t_start: float, t_end: float, _fixed=fixed):
            return [(t, c) for t, c in _fixed if t_start < t <= t_end]

    belief = prior_belief
    if belief is None:
        belief = initial_belief(model, obs, measurements[0], intent_prior_std, velocity_prior_std)
    all_events: list[tuple[float, "int | None"]] = []
    records = [
        StepRecord(
            t=float(times[0]),
            mean=belief.mean.copy(),
            marginal_var=np.diag(belief.cov).copy(),
            ess=float("nan"),
            resampled=False,
            map_events=(),
        )
    ]
    if on_step is not None:
        on_step(float(times[0]), belief)
    for k in range(1, times.size):
        window = (float(times[k - 1]), float(times[k]))
        events = list(schedule(window[0], window[1]))
        all_events.extend(events)
        trans = model.window_transition(window, events)
        belief = kalman_predict(belief, trans)
        belief, _ = kalman_update(belief, obs, measurements[k])
        records.append(
            StepRecord(
                t=window[1],
                mean=belief.mean.copy(),
                marginal_var=np.diag(belief.cov).copy(),
                ess=float("nan"),
                resampled=False,
                map_events=tuple(all_events),
            )
        )
        if on_step is not None:
            on_step(window[1], belief)
    return FilterRun(records=records, final=None)
