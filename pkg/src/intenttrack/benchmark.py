"""Benchmark harness comparing the motion-model family on synthetic tracks.

Each realisation draws one ground-truth track and one measurement stream,
then every method filters the identical measurements: the diffuse-leader
Kalman baseline, the particle filters for the jumpy models, and two oracle
variants of the piecewise-constant model that condition on the true switch
times (and waypoints). Scores are per-trajectory RMSEs of the position and
destination point estimates against the interpolated truth and the active
waypoint; orderings between methods are assessed by paired bootstrap over
realisations.

Filter parameters ship as frozen defaults tuned once on a held-out seed
set (seeds disjoint from any documented benchmark seed); the scenario
generator's parameters live in ScenarioConfig.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .filter import (
    FilterRun,
    initial_belief,
    position_observation,
    run_conditional_kalman,
    run_filter,
)
from .jumps import JumpPrior
from .kalman import GaussianBelief, ObservationModel
from .models import DestinationSet, IntentModel, ModelKind, ModelParams
from .simulate import GeneratorKind, ScenarioConfig, Trajectory, position_rmse, simulate, synthesize_measurements

# Spacers keeping the scenario and filter entropy tuples disjoint.
_SCENARIO_KEY = 104729
_FILTER_KEY = 1299721

METHOD_DIFFUSE_KF = "vl-d-kf"
METHOD_PIECEWISE = "vl-pc-rbvrpf"
METHOD_JUMP_DIFFUSION = "vl-jd-rbvrpf"
METHOD_FAST_MANOEUVRE = "vl-fmt-rbvrpf"
METHOD_MULTI_HYPOTHESIS = "vl-multhyp-rbvrpf"
METHOD_KNOWN_SWITCHES = "vl-pc-known-tau"
METHOD_KNOWN_SWITCHES_WAYPOINTS = "vl-pc-known-tau-r"

WAYPOINT_TABLE_METHODS = (
    METHOD_DIFFUSE_KF,
    METHOD_PIECEWISE,
    METHOD_JUMP_DIFFUSION,
    METHOD_FAST_MANOEUVRE,
    METHOD_MULTI_HYPOTHESIS,
    METHOD_KNOWN_SWITCHES,
    METHOD_KNOWN_SWITCHES_WAYPOINTS,
)
MANOEUVRE_TABLE_METHODS = (
    METHOD_DIFFUSE_KF,
    METHOD_PIECEWISE,
    METHOD_JUMP_DIFFUSION,
    METHOD_FAST_MANOEUVRE,
)


@dataclass(frozen=True)
class FilterDefaults:
    """Frozen filter parameters shared by every benchmark method.

    Attributes:
        reversion: Pull of the velocity toward the leader offset (1/s^2).
        damping: Velocity damping (1/s).
        sigma_motion: Velocity diffusion density used by every filter.
        baseline_diffusion: Leader diffusion density of the diffuse-leader
            Kalman baseline, whose leader moves by diffusion alone; sized
            so the leader can track waypoint changes on nominal tracks.
        leader_diffusion: Leader diffusion density of the fast manoeuvring
            kind, whose leader likewise moves by diffusion alone but whose
            velocity jumps soak up the sharp accelerations.
        refinement_diffusion: Leader diffusion density of the
            jump-diffusion kind, whose jumps carry the large moves and
            whose diffusion only makes finer corrections near an endpoint.
        switch_shape: Gamma shape of the leader-switch renewal priors.
        switch_scale: Gamma scale of the renewal prior for the
            piecewise-constant kind and its oracle variants (s). Set
            conservatively: a spurious jump irreversibly resets that
            kind's leader belief, so rare proposals are preferred.
        eager_switch_scale: Gamma scale of the renewal prior for the
            jump-diffusion and multi-hypothesis kinds (s), matched to the
            nominal leg rate; their extra leader mechanisms (diffusion,
            destination anchoring) cushion spurious resets, so eager
            proposals cost little and track real switches sooner.
        sigma_jump: Leader jump std for the piecewise-constant and
            jump-diffusion kinds (m).
        manoeuvre_prior_shape: Gamma shape of the velocity-jump prior used
            by the fast manoeuvring filter.
        manoeuvre_prior_scale: Gamma scale of that prior (s).
        velocity_sigma_jump: Velocity jump std of the fast manoeuvring
            filter (m/s).
        mh_extent: Arrival spread around nominated destinations (m).
        mh_stay: Self-transition probability of each hypothesis.
        n_particles: Particle count for the particle-filter methods.
        ess_threshold: Resampling trigger as a fraction of the bank size.
        intent_prior_std: Initial leader spread (m).
        velocity_prior_std: Initial velocity spread (m/s).
    """

    reversion: float = 0.15
    damping: float = 0.8
    sigma_motion: float = 14.0
    baseline_diffusion: float = 80.0
    leader_diffusion: float = 40.0
    refinement_diffusion: float = 5.0
    switch_shape: float = 2.0
    switch_scale: float = 60.0
    eager_switch_scale: float = 25.0
    sigma_jump: float = 400.0
    manoeuvre_prior_shape: float = 2.0
    manoeuvre_prior_scale: float = 3.0
    velocity_sigma_jump: float = 50.0
    mh_extent: float = 25.0
    mh_stay: float = 0.85
    n_particles: int = 500
    ess_threshold: float = 0.5
    intent_prior_std: float = 1000.0
    velocity_prior_std: float = 60.0


DEFAULTS = FilterDefaults()


@dataclass(frozen=True)
class BenchmarkResult:
    """Per-method, per-realisation RMSE scores for one scenario batch.

    Attributes:
        methods: Method names in run order.
        position: Position RMSE per method and realisation, shape (M, R).
        destination: Destination RMSE, same shape; NaN where the method
            does not produce a destination estimate to score.
        generator: Which trajectory generator produced the batch.
        seed: Scenario seed the batch was keyed on.
    """

    methods: tuple[str, ...]
    position: np.ndarray
    destination: np.ndarray
    generator: GeneratorKind
    seed: int

    def _row(self, name: str) -> int:
        try:
            return self.methods.index(name)
        except ValueError:
            raise ConfigError(f"method {name!r} is not part of this result") from None

    def position_rmse_per_run(self, name: str) -> np.ndarray:
        return self.position[self._row(name)]

    def destination_rmse_per_run(self, name: str) -> np.ndarray:
        return self.destination[self._row(name)]

    def mean_position_rmse(self, name: str) -> float:
        return float(np.mean(self.position[self._row(name)]))

    def mean_destination_rmse(self, name: str) -> float:
        return float(np.mean(self.destination[self._row(name)]))

    def table_rows(self) -> list[dict]:
        rows = []
        for i, name in enumerate(self.methods):
            dest = float(np.mean(self.destination[i]))
            rows.append(
                {
                    "method": name,
                    "position_rmse": float(np.mean(self.position[i])),
                    "destination_rmse": None if np.isnan(dest) else dest,
                }
            )
        return rows

    def table_text(self) -> str:
        width = max(len(name) for name in self.methods)
        lines = [f"{'method':<{width}}  {'position':>10}  {'destination':>11}"]
        for row in self.table_rows():
            dest = "-" if row["destination_rmse"] is None else f"{row['destination_rmse']:.3f}"
            lines.append(
                f"{row['method']:<{width}}  {row['position_rmse']:>10.3f}  {dest:>11}"
            )
        return "\n".join(lines) + "\n"


def _sticky_transition(n_hypotheses: int, stay: float) -> np.ndarray:
    out = np.full((n_hypotheses, n_hypotheses), (1.0 - stay) / (n_hypotheses - 1))
    np.fill_diagonal(out, stay)
    return out


def _method_run(
    name: str,
    defaults: FilterDefaults,
    config: ScenarioConfig,
    traj: Trajectory,
    obs: ObservationModel,
    times: np.ndarray,
    measurements: np.ndarray,
    seed: int,
    n_particles: int,
) -> tuple[IntentModel, FilterRun, bool]:
    """Run one named method; returns (model, run, scores_destination)."""
    dims = config.dims
    common = dict(
        reversion=defaults.reversion,
        damping=defaults.damping,
        sigma_motion=defaults.sigma_motion,
        dims=dims,
    )
    switch_prior = JumpPrior(defaults.switch_shape, defaults.switch_scale)
    eager_prior = JumpPrior(defaults.switch_shape, defaults.eager_switch_scale)

    def pf(model: IntentModel) -> FilterRun:
        return run_filter(
            model,
            obs,
            times,
            measurements,
            n_particles=n_particles,
            ess_threshold=defaults.ess_threshold,
            seed=seed,
            intent_prior_std=defaults.intent_prior_std,
            velocity_prior_std=defaults.velocity_prior_std,
        )

    if name == METHOD_DIFFUSE_KF:
        model = IntentModel(
            ModelKind.BASELINE,
            ModelParams(**common, sigma_intent=defaults.baseline_diffusion),
        )
        return model, run_conditional_kalman(
            model, obs, times, measurements, [],
            intent_prior_std=defaults.intent_prior_std,
            velocity_prior_std=defaults.velocity_prior_std,
        ), True
    if name == METHOD_PIECEWISE:
        model = IntentModel(
            ModelKind.PIECEWISE_CONSTANT,
            ModelParams(**common, sigma_jump=defaults.sigma_jump),
            jump_prior=switch_prior,
        )
        return model, pf(model), True
    if name == METHOD_JUMP_DIFFUSION:
        model = IntentModel(
            ModelKind.JUMP_DIFFUSION,
            ModelParams(
                **common,
                sigma_intent=defaults.refinement_diffusion,
                sigma_jump=defaults.sigma_jump,
            ),
            jump_prior=eager_prior,
        )
        return model, pf(model), True
    if name == METHOD_FAST_MANOEUVRE:
        model = IntentModel(
            ModelKind.FAST_MANOEUVRING,
            ModelParams(
                **common,
                sigma_intent=defaults.leader_diffusion,
                sigma_jump=defaults.velocity_sigma_jump,
            ),
            jump_prior=JumpPrior(defaults.manoeuvre_prior_shape, defaults.manoeuvre_prior_scale),
        )
        return model, pf(model), True
    if name == METHOD_MULTI_HYPOTHESIS:
        k = traj.waypoints.shape[0] + 1
        destinations = DestinationSet(
            positions=traj.waypoints,
            extents=np.full_like(traj.waypoints, defaults.mh_extent),
            transition=_sticky_transition(k, defaults.mh_stay),
            initial=np.full(k, 1.0 / k),
        )
        model = IntentModel(
            ModelKind.MULTI_HYPOTHESIS,
            ModelParams(**common, sigma_jump=defaults.sigma_jump),
            jump_prior=eager_prior,
            destinations=destinations,
        )
        return model, pf(model), True
    if name == METHOD_KNOWN_SWITCHES:
        model = IntentModel(
            ModelKind.PIECEWISE_CONSTANT,
            ModelParams(**common, sigma_jump=defaults.sigma_jump),
            jump_prior=switch_prior,
        )
        schedule = [(t, None) for t in traj.switch_times]
        return model, run_conditional_kalman(
            model, obs, times, measurements, schedule,
            intent_prior_std=defaults.intent_prior_std,
            velocity_prior_std=defaults.velocity_prior_std,
        ), True
    if name == METHOD_KNOWN_SWITCHES_WAYPOINTS:
        k = traj.waypoints.shape[0] + 1
        destinations = DestinationSet(
            positions=traj.waypoints,
            extents=np.zeros_like(traj.waypoints),
            transition=np.full((k, k), 1.0 / k),
            initial=np.full(k, 1.0 / k),
        )
        model = IntentModel(
            ModelKind.MULTI_HYPOTHESIS,
            ModelParams(**common, sigma_jump=defaults.sigma_jump),
            jump_prior=switch_prior,
            destinations=destinations,
        )
        # The first waypoint is known too: pin the leader on it exactly.
        prior = initial_belief(
            model, obs, measurements[0],
            intent_prior_std=defaults.intent_prior_std,
            velocity_prior_std=defaults.velocity_prior_std,
        )
        mean = prior.mean.copy()
        cov = prior.cov.copy()
        idx = model.intent_indices
        mean[idx] = traj.waypoints[0]
        cov[idx, :] = 0.0
        cov[:, idx] = 0.0
        schedule = [(t, j + 2) for j, t in enumerate(traj.switch_times)]
        return model, run_conditional_kalman(
            model, obs, times, measurements, schedule,
            prior_belief=GaussianBelief(mean, cov),
        ), False
    raise ConfigError(f"unknown benchmark method {name!r}")


def run_benchmark(
    config: ScenarioConfig,
    methods: "tuple[str, ...] | None" = None,
    realisations: int = 50,
    defaults: FilterDefaults = DEFAULTS,
    n_particles: "int | None" = None,
) -> BenchmarkResult:
    """Score a method set over freshly simulated realisations.

    Every method sees the identical measurement stream within each
    realisation; waypoint counts are drawn uniformly from 3 to 5. The whole
    batch is a pure function of the scenario config (including its seed),
    the method list, and the filter defaults.

    Args:
        config: Scenario configuration; its seed keys all randomness.
        methods: Method names; defaults to the full table for the
            configured generator.
        realisations: Number of simulated tracks.
        defaults: Filter parameters for every method.
        n_particles: Override of ``defaults.n_particles``.

    Raises:
        ConfigError: On an unknown method name or zero measurement noise.
    """
    if methods is None:
        methods = (
            WAYPOINT_TABLE_METHODS
            if config.generator is GeneratorKind.WAYPOINT_CV
            else MANOEUVRE_TABLE_METHODS
        )
    for name in methods:
        if name not in WAYPOINT_TABLE_METHODS:
            raise ConfigError(f"unknown benchmark method {name!r}")
    if config.sigma_measurement <= 0.0:
        raise ConfigError("benchmarking requires positive measurement noise")
    if realisations < 1:
        raise ConfigError("need at least one realisation")
    n_particles = defaults.n_particles if n_particles is None else n_particles

    obs = position_observation(config.dims, config.sigma_measurement)
    position = np.empty((len(methods), realisations))
    destination = np.empty((len(methods), realisations))
    for r in range(realisations):
        rng = np.random.default_rng([config.seed, _SCENARIO_KEY, r])
        scenario = replace(config, n_waypoints=int(rng.integers(3, 6)))
        traj = simulate(scenario, rng)
        times, measurements = synthesize_measurements(traj, scenario, rng)
        truth_positions, _, _ = traj.state_at(times)
        truth_destinations = traj.active_waypoints(times)
        # One filter seed per realisation, shared by every method: common
        # random numbers make the paired method differences low-variance.
        pf_seed = int(
            np.random.SeedSequence([config.seed, _FILTER_KEY, r]).generate_state(1)[0]
        )
        for m, name in enumerate(methods):
            model, run, scores_destination = _method_run(
                name, defaults, scenario, traj, obs, times, measurements, pf_seed, n_particles
            )
            means = np.array([record.mean for record in run.records])
            position[m, r] = position_rmse(
                means[:, model.position_indices], truth_positions
            )
            destination[m, r] = (
                position_rmse(means[:, model.intent_indices], truth_destinations)
                if scores_destination
                else np.nan
            )
    return BenchmarkResult(
        methods=tuple(methods),
        position=position,
        destination=destination,
        generator=config.generator,
        seed=config.seed,
    )


def ordering_confidence(
    result: BenchmarkResult,
    better: str,
    worse: str,
    metric: str = "position",
    n_boot: int = 2000,
    seed: int = 0,
) -> float:
    """Paired-bootstrap confidence that one method outscores another.

    Resamples realisations with replacement and reports the fraction of
    resamples in which the mean RMSE of ``better`` is strictly below that
    of ``worse``.
    """
    if metric == "position":
        a = result.position_rmse_per_run(better)
        b = result.position_rmse_per_run(worse)
    elif metric == "destination":
        a = result.destination_rmse_per_run(better)
        b = result.destination_rmse_per_run(worse)
    else:
        raise ConfigError(f"unknown metric {metric!r}")
    if np.any(np.isnan(a)) or np.any(np.isnan(b)):
        raise ConfigError("method does not score this metric")
    rng = np.random.default_rng(seed)
    n = a.size
    idx = rng.integers(0, n, size=(n_boot, n))
    return float(np.mean(a[idx].mean(axis=1) < b[idx].mean(axis=1)))
