"""Intent queries over the filtered posterior.

The filter's posterior over the full state is a Gaussian mixture, so the
destination marginal is a mixture too: slice out the intent coordinates of
every component. Point densities are direct mixture evaluations, and
region probabilities integrate each component over an axis-aligned box:
exactly (per-axis normal CDF products) when the component's intent block
is diagonal, otherwise with a fixed quasi-random point set so that results
are reproducible and additive over disjoint boxes.

All queries are read-only and operate on immutable posterior snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import multivariate_normal, qmc

from .errors import ContractViolationError, DimensionError
from .filter import GaussianMixture, ParticleSet
from .models import DestinationSet

# 2^14 quasi-random points give box probabilities well inside 1e-3; the
# all-zeros first point is dropped because it maps to -inf quantiles.
_QMC_EXPONENT = 14
_normal_points: dict[int, np.ndarray] = {}


def _normal_point_set(dim: int) -> np.ndarray:
    """Deterministic standard-normal point set shared by every query."""
    if dim not in _normal_points:
        engine = qmc.Sobol(d=dim, scramble=False)
        engine.fast_forward(1)
        uniforms = engine.random(2**_QMC_EXPONENT - 1)
        _normal_points[dim] = ndtri(uniforms)
    return _normal_points[dim]


@dataclass(frozen=True)
class Region:
    """Axis-aligned box with half-open extent (lower, upper] on each axis.

    Attributes:
        lower: Per-axis lower bounds (m), shape (d,).
        upper: Per-axis upper bounds (m), shape (d,).
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise DimensionError(f"bounds must be matching vectors, got {lower.shape} and {upper.shape}")
        if not np.all(lower < upper):
            raise ContractViolationError("each axis needs lower < upper")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size


@dataclass(frozen=True)
class HypothesisReport:
    """Posterior probabilities over the null and destination hypotheses.

    Attributes:
        probabilities: Entry j is the probability of hypothesis j, where 0
            is the null (no nominated destination); sums to 1.
    """

    probabilities: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probabilities, dtype=float)
        if probs.ndim != 1 or probs.size < 1:
            raise DimensionError("probabilities must be a non-empty vector")
        total = probs.sum()
        if not np.isfinite(total) or abs(total - 1.0) > 1e-9 or np.any(probs < 0.0):
            raise ContractViolationError("probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "probabilities", probs / total)


def destination_marginal(mix: GaussianMixture, dims: "int | None" = None) -> GaussianMixture:
    """Marginalise a full-state mixture onto its intent coordinates.

    Weights are untouched; each component keeps the intent sub-vector of
    its mean and sub-block of its covariance. With ``dims`` unset, any
    mixture whose dimension is a multiple of 3 is treated as a full state
    (3 coordinates per axis) and anything else is assumed to be already
    marginal and returned unchanged; pass ``dims`` to force the reading
    when an already-marginal mixture has a multiple-of-3 dimension.
    """
    n = mix.means.shape[1]
    if dims is None:
        if n % 3 != 0:
            return mix
        dims = n // 3
    elif dims == 0:
        return mix
    if n != 3 * dims:
        raise DimensionError(f"mixture dimension {n} does not hold {dims} axes")
    return mix.marginal(3 * np.arange(dims) + 2)


def point_intent_density(marginal: GaussianMixture, point: np.ndarray) -> float:
    """Mixture density of the destination posterior at one point.

    Singular components (a destination pinned exactly) are evaluated on
    their support subspace, so tight resets do not break the query; only
    relative comparisons across candidate points are meaningful then.
    """
    point = np.atleast_1d(np.asarray(point, dtype=float))
    if point.size != marginal.means.shape[1]:
        raise DimensionError(
            f"point has {point.size} coordinates, mixture has {marginal.means.shape[1]}"
        )
    value = 0.0
    for weight, mean, cov in marginal.components:
        value += weight * multivariate_normal.pdf(point, mean, cov, allow_singular=True)
    return float(value)


def _box_probability_diag(
    mean: np.ndarray, var: np.ndarray, region: Region
) -> float:
    """Exact box probability for an axis-independent component."""
    prob = 1.0
    sd = np.sqrt(var)
    for a in range(region.dim):
        if sd[a] == 0.0:
            prob *= 1.0 if region.lower[a] < mean[a] <= region.upper[a] else 0.0
        else:
            prob *= float(
                ndtr((region.upper[a] - mean[a]) / sd[a])
                - ndtr((region.lower[a] - mean[a]) / sd[a])
            )
    return prob


def _box_probability_qmc(mean: np.ndarray, cov: np.ndarray, region: Region) -> float:
    """Quasi-random box probability for a correlated component."""
    w, V = np.linalg.eigh(cov)
    root = V * np.sqrt(np.clip(w, 0.0, None))
    points = mean + _normal_point_set(region.dim) @ root.T
    inside = np.all((points > region.lower) & (points <= region.upper), axis=1)
    return float(inside.mean())


def region_probability(marginal: GaussianMixture, region: Region) -> float:
    """Probability that the destination lies in an axis-aligned box.

    Each mixture component contributes its Gaussian box probability,
    computed exactly per axis when its covariance is diagonal and by the
    shared deterministic point set otherwise. Disjoint boxes therefore add
    exactly, and rerunning a query reproduces the same value bit for bit.
    """
    if region.dim != marginal.means.shape[1]:
        raise DimensionError(
            f"region has {region.dim} axes, mixture has {marginal.means.shape[1]}"
        )
    total = 0.0
    for weight, mean, cov in marginal.components:
        off_diagonal = cov - np.diag(np.diag(cov))
        if np.all(off_diagonal == 0.0):
            total += weight * _box_probability_diag(mean, np.diag(cov), region)
        else:
            total += weight * _box_probability_qmc(mean, cov, region)
    return float(min(max(total, 0.0), 1.0))


def hypothesis_probabilities(
    pset: ParticleSet, destinations: DestinationSet
) -> HypothesisReport:
    """Posterior hypothesis probabilities from particle weights.

    The probability of hypothesis j is the total normalised weight of the
    particles whose latest jump indicator equals j; particles that have not
    jumped yet report the indicator drawn at initialisation.

    Raises:
        ContractViolationError: If the particles carry no indicators, i.e.
            the filter was not run with the multiple-hypothesis model.
    """
    n_hypotheses = destinations.n_destinations + 1
    probs = np.zeros(n_hypotheses)
    weights = pset.weights
    for i, seq in enumerate(pset.jumps):
        indicator = seq.last_indicator
        if indicator is None:
            raise ContractViolationError("particles carry no hypothesis indicators")
        if not 0 <= indicator < n_hypotheses:
            raise ContractViolationError(f"indicator {indicator} has no destination")
        probs[indicator] += weights[i]
    return HypothesisReport(probs)
