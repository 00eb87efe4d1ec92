"""Intent-aware target tracking with virtual-leader motion models.

The package estimates a target's kinematic state together with its latent
intent (the destination it is heading for) from noisy position
measurements. Motion is modelled per axis as position and velocity pulled
toward a virtual leader; the model kinds differ in how that leader moves,
from pure diffusion to piecewise-constant legs with renewal-prior switch
times to nominated destination hypotheses. Jumpy kinds are filtered with a
Rao-Blackwellised variable-rate particle filter whose particles carry
exact conditional Kalman beliefs; the diffuse baseline reduces to a single
Kalman filter.

Typical entry points: build an :class:`IntentModel`, call
:func:`run_filter` on a measurement series, and interrogate the posterior
with the query helpers. :func:`run_benchmark` scores method sets over
simulated scenarios, and the ``intenttrack`` command line wraps all of it
behind config files.
"""

from __future__ import annotations

from .benchmark import (
    DEFAULTS,
    MANOEUVRE_TABLE_METHODS,
    WAYPOINT_TABLE_METHODS,
    BenchmarkResult,
    FilterDefaults,
    ordering_confidence,
    run_benchmark,
)
from .errors import (
    ConfigError,
    ContractViolationError,
    DataError,
    FilterDegenerateError,
    DimensionError,
    IntentTrackError,
    NumericError,
)
from .filter import (
    FilterRun,
    GaussianMixture,
    ParticleSet,
    StepRecord,
    ess,
    initial_belief,
    position_observation,
    posterior_mixture,
    run_conditional_kalman,
    run_filter,
)
from .io import ModelConfig, RunConfig, parse_config, read_config, write_config
from .jumps import JumpPrior, JumpSequence
from .kalman import GaussianBelief, ObservationModel
from .models import (
    DestinationSet,
    IntentModel,
    ModelKind,
    ModelParams,
    TransitionParams,
)
from .query import (
    HypothesisReport,
    Region,
    destination_marginal,
    hypothesis_probabilities,
    point_intent_density,
    region_probability,
)
from .sde import expm, jump_contributions, process_covariance
from .simulate import (
    GeneratorKind,
    ScenarioConfig,
    Trajectory,
    simulate,
    synthesize_measurements,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkResult",
    "ConfigError",
    "ContractViolationError",
    "DEFAULTS",
    "DataError",
    "DestinationSet",
    "DimensionError",
    "FilterDefaults",
    "FilterDegenerateError",
    "FilterRun",
    "GaussianBelief",
    "GaussianMixture",
    "GeneratorKind",
    "HypothesisReport",
    "IntentModel",
    "IntentTrackError",
    "JumpPrior",
    "JumpSequence",
    "MANOEUVRE_TABLE_METHODS",
    "ModelConfig",
    "ModelKind",
    "ModelParams",
    "NumericError",
    "ObservationModel",
    "ParticleSet",
    "Region",
    "RunConfig",
    "ScenarioConfig",
    "StepRecord",
    "Trajectory",
    "TransitionParams",
    "WAYPOINT_TABLE_METHODS",
    "destination_marginal",
    "ess",
    "expm",
    "hypothesis_probabilities",
    "initial_belief",
    "jump_contributions",
    "ordering_confidence",
    "parse_config",
    "point_intent_density",
    "position_observation",
    "posterior_mixture",
    "process_covariance",
    "read_config",
    "region_probability",
    "run_benchmark",
    "run_conditional_kalman",
    "run_filter",
    "simulate",
    "synthesize_measurements",
    "write_config",
]
