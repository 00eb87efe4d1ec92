"""Intent query tests.

Point densities are pinned against a hand-rolled mixture pdf, the
destination marginal against a million-sample Kolmogorov-Smirnov check,
and the quasi-random box integrator against both the exact per-axis path
and an independent numeric box-probability oracle.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.stats import kstest, multivariate_normal, norm

from intenttrack.errors import ContractViolationError, DimensionError
from intenttrack.filter import GaussianMixture, ParticleSet, ess, init, run_filter
from intenttrack.jumps import JumpPrior, JumpSequence
from intenttrack.kalman import GaussianBelief, ObservationModel
from intenttrack.models import DestinationSet, IntentModel, ModelKind, ModelParams
from intenttrack.query import (
    HypothesisReport,
    Region,
    destination_marginal,
    hypothesis_probabilities,
    point_intent_density,
    region_probability,
)

from test_filter import mh_model
from test_models import sample_gaussian


def random_mixture(rng: np.random.Generator, k: int, dim: int) -> GaussianMixture:
    weights = rng.random(k) + 0.1
    weights /= weights.sum()
    means = rng.normal(scale=5.0, size=(k, dim))
    covs = np.empty((k, dim, dim))
    for i in range(k):
        root = rng.normal(size=(dim, dim))
        covs[i] = root @ root.T + 0.5 * np.eye(dim)
    return GaussianMixture(weights, means, covs)


def dense_mixture_pdf(mix: GaussianMixture, point: np.ndarray) -> float:
    total = 0.0
    for w, mu, cov in mix.components:
        diff = point - mu
        _, logdet = np.linalg.slogdet(cov)
        quad = diff @ np.linalg.solve(cov, diff)
        total += w * math.exp(-0.5 * (mu.size * math.log(2.0 * math.pi) + logdet + quad))
    return total


class TestDestinationMarginal:
    def test_extracts_intent_block_exactly(self):
        cov = np.array([[4.0, 1.0, 0.5], [1.0, 9.0, 0.2], [0.5, 0.2, 16.0]])
        mix = GaussianMixture(np.array([1.0]), np.array([[1.0, 2.0, 3.0]]), cov[None])
        out = destination_marginal(mix)
        assert np.array_equal(out.means, [[3.0]])
        assert np.array_equal(out.covs, [[[16.0]]])
        assert np.array_equal(out.weights, mix.weights)

    def test_two_axis_layout(self):
        rng = np.random.default_rng(1)
        mix = random_mixture(rng, 3, 6)
        out = destination_marginal(mix)
        assert out.means.shape == (3, 2)
        assert np.array_equal(out.means[:, 0], mix.means[:, 2])
        assert np.array_equal(out.means[:, 1], mix.means[:, 5])
        assert np.array_equal(out.covs[:, 0, 1], mix.covs[:, 2, 5])

    def test_idempotent_on_marginals(self):
        rng = np.random.default_rng(2)
        mix = random_mixture(rng, 2, 6)
        once = destination_marginal(mix)
        assert destination_marginal(once) is once
        assert destination_marginal(once, dims=0) is once

    def test_explicit_dims_validated(self):
        rng = np.random.default_rng(3)
        mix = random_mixture(rng, 2, 6)
        with pytest.raises(DimensionError):
            destination_marginal(mix, dims=3)

    def test_sampling_oracle_ks(self):
        rng = np.random.default_rng(4)
        mix = random_mixture(rng, 3, 3)
        marginal = destination_marginal(mix)
        n = 1_000_000
        labels = rng.choice(3, size=n, p=mix.weights)
        draws = np.concatenate(
            [
                sample_gaussian(rng, mix.means[k], mix.covs[k], int((labels == k).sum()))
                for k in range(3)
            ]
        )[:, 2]

        def marginal_cdf(x):
            return sum(
                w * norm.cdf(x, loc=mu[0], scale=math.sqrt(cov[0, 0]))
                for w, mu, cov in marginal.components
            )

        assert kstest(draws, marginal_cdf).statistic < 0.01


class TestPointDensity:
    def test_mode_of_unit_gaussian(self):
        mix = GaussianMixture(np.array([1.0]), np.zeros((1, 2)), np.eye(2)[None])
        assert point_intent_density(mix, np.zeros(2)) == pytest.approx(
            1.0 / (2.0 * math.pi), rel=1e-12
        )

    def test_component_order_is_irrelevant(self):
        mu = np.array([[3.0, -1.0], [-3.0, 1.0]])
        cov = np.tile(np.eye(2), (2, 1, 1))
        forward = GaussianMixture(np.array([0.5, 0.5]), mu, cov)
        swapped = GaussianMixture(np.array([0.5, 0.5]), mu[::-1].copy(), cov)
        point = np.array([0.7, 0.2])
        assert point_intent_density(forward, point) == point_intent_density(swapped, point)

    def test_matches_direct_summation_oracle(self):
        rng = np.random.default_rng(5)
        for dim in (1, 2, 3):
            mix = random_mixture(rng, 4, dim)
            for _ in range(5):
                point = rng.normal(scale=4.0, size=dim)
                expected = dense_mixture_pdf(mix, point)
                assert point_intent_density(mix, point) == pytest.approx(expected, rel=1e-12)

    def test_singular_component_is_tolerated(self):
        mix = GaussianMixture(
            np.array([0.5, 0.5]),
            np.array([[1.0], [2.0]]),
            np.stack([np.zeros((1, 1)), np.ones((1, 1))]),
        )
        value = point_intent_density(mix, np.array([2.0]))
        assert np.isfinite(value) and value > 0.0

    def test_dimension_mismatch(self):
        mix = GaussianMixture(np.array([1.0]), np.zeros((1, 2)), np.eye(2)[None])
        with pytest.raises(DimensionError):
            point_intent_density(mix, np.zeros(3))


class TestRegionProbability:
    def test_whole_space_is_one(self):
        rng = np.random.default_rng(6)
        mix = random_mixture(rng, 3, 2)
        region = Region(np.full(2, -1e9), np.full(2, 1e9))
        assert region_probability(mix, region) == pytest.approx(1.0, abs=1e-9)

    def test_central_interval_of_standard_normal(self):
        mix = GaussianMixture(np.array([1.0]), np.zeros((1, 1)), np.ones((1, 1, 1)))
        prob = region_probability(mix, Region(np.array([-1.96]), np.array([1.96])))
        assert prob == pytest.approx(0.95, abs=1e-3)

    def test_disjoint_additivity_exact_path(self):
        mix = GaussianMixture(
            np.array([0.6, 0.4]),
            np.array([[0.0, 1.0], [2.0, -1.0]]),
            np.stack([np.diag([1.0, 4.0]), np.diag([2.0, 0.5])]),
        )
        left = Region(np.array([-1.0, -2.0]), np.array([0.3, 0.5]))
        right = Region(np.array([0.3, -2.0]), np.array([1.5, 0.5]))
        union = Region(np.array([-1.0, -2.0]), np.array([1.5, 0.5]))
        total = region_probability(mix, left) + region_probability(mix, right)
        assert total == pytest.approx(region_probability(mix, union), abs=1e-9)

    def test_disjoint_additivity_quasi_random_path(self):
        rng = np.random.default_rng(7)
        mix = random_mixture(rng, 2, 2)
        assert np.any(mix.covs[0] != np.diag(np.diag(mix.covs[0])))
        left = Region(np.array([-2.0, -3.0]), np.array([0.4, 1.0]))
        right = Region(np.array([0.4, -3.0]), np.array([2.5, 1.0]))
        union = Region(np.array([-2.0, -3.0]), np.array([2.5, 1.0]))
        total = region_probability(mix, left) + region_probability(mix, right)
        assert total == pytest.approx(region_probability(mix, union), abs=1e-9)

    def test_monotone_under_inclusion(self):
        rng = np.random.default_rng(8)
        mix = random_mixture(rng, 3, 2)
        inner = Region(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
        outer = Region(np.array([-2.0, -1.5]), np.array([3.0, 2.0]))
        assert region_probability(mix, inner) <= region_probability(mix, outer) + 1e-9

    def test_quasi_random_matches_numeric_oracle(self):
        rng = np.random.default_rng(9)
        for dim in (2, 3):
            for _ in range(4):
                mix = random_mixture(rng, 1, dim)
                centre = mix.means[0]
                half = rng.random(dim) * 2.0 + 0.5
                region = Region(centre - half, centre + half)
                expected = multivariate_normal.cdf(
                    region.upper, centre, mix.covs[0], lower_limit=region.lower
                )
                assert region_probability(mix, region) == pytest.approx(expected, abs=2e-3)

    def test_reruns_are_bit_identical(self):
        rng = np.random.default_rng(10)
        mix = random_mixture(rng, 2, 3)
        region = Region(np.array([-1.0, -1.0, -1.0]), np.array([2.0, 0.5, 3.0]))
        assert region_probability(mix, region) == region_probability(mix, region)

    def test_point_mass_components_use_half_open_bounds(self):
        mix = GaussianMixture(np.array([1.0]), np.array([[1.0]]), np.zeros((1, 1, 1)))
        assert region_probability(mix, Region(np.array([0.0]), np.array([1.0]))) == 1.0
        assert region_probability(mix, Region(np.array([1.0]), np.array([2.0]))) == 0.0

    def test_region_validation(self):
        with pytest.raises(ContractViolationError):
            Region(np.array([1.0]), np.array([1.0]))
        with pytest.raises(DimensionError):
            Region(np.array([1.0, 2.0]), np.array([3.0]))
        mix = GaussianMixture(np.array([1.0]), np.zeros((1, 2)), np.eye(2)[None])
        with pytest.raises(DimensionError):
            region_probability(mix, Region(np.array([0.0]), np.array([1.0])))


def manual_hypothesis_set(weights: np.ndarray, indicators: list[int]) -> ParticleSet:
    n = weights.size
    return ParticleSet(
        seed=0,
        ess_threshold=0.5,
        step_index=1,
        t=1.0,
        log_weights=np.log(weights),
        means=np.zeros((n, 3)),
        covs=np.tile(np.eye(3), (n, 1, 1)),
        jumps=tuple(JumpSequence(0.0, c0=c) for c in indicators),
        last_ess=ess(weights),
    )


class TestHypothesisProbabilities:
    def test_shared_indicator_is_one_hot(self):
        model = mh_model()
        pset = manual_hypothesis_set(np.full(4, 0.25), [2, 2, 2, 2])
        report = hypothesis_probabilities(pset, model.destinations)
        assert np.allclose(report.probabilities, [0.0, 0.0, 1.0])

    def test_equal_split(self):
        model = mh_model()
        pset = manual_hypothesis_set(np.array([0.5, 0.5]), [0, 1])
        report = hypothesis_probabilities(pset, model.destinations)
        assert np.allclose(report.probabilities, [0.5, 0.5, 0.0])

    def test_random_weights_sum_to_one(self):
        model = mh_model()
        rng = np.random.default_rng(11)
        weights = rng.random(12)
        weights /= weights.sum()
        indicators = list(rng.choice(3, size=12))
        report = hypothesis_probabilities(pset := manual_hypothesis_set(weights, indicators), model.destinations)
        assert report.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
        assert pset.n_particles == 12

    def test_rejects_runs_without_indicators(self):
        model = IntentModel(ModelKind.BASELINE, ModelParams(1.0, 0.5, 1.0, 0.3))
        pset = init(model, GaussianBelief(np.zeros(3), np.eye(3)), 4)
        mh = mh_model()
        with pytest.raises(ContractViolationError):
            hypothesis_probabilities(pset, mh.destinations)

    def test_report_validation(self):
        with pytest.raises(ContractViolationError):
            HypothesisReport(np.array([0.5, 0.2]))

    def test_detects_true_destination_on_approach_data(self):
        # Position curls in on the farther destination; by the end most of
        # the weight should sit on that hypothesis.
        model = mh_model()
        times = np.arange(0.0, 50.0)
        rng = np.random.default_rng(12)
        positions = 120.0 * (1.0 - np.exp(-0.08 * times))
        meas = (positions + 2.0 * rng.standard_normal(times.size))[:, None]
        obs = ObservationModel(H=np.array([[1.0, 0.0, 0.0]]), R=np.array([[4.0]]))
        reports: list[HypothesisReport] = []
        run_filter(
            model,
            obs,
            times,
            meas,
            n_particles=400,
            seed=3,
            on_step=lambda p: reports.append(hypothesis_probabilities(p, model.destinations)),
        )
        assert reports[-1].probabilities[2] > 0.5
