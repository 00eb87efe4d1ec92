"""Tests for the benchmark harness at toy scale."""

import numpy as np
import pytest

from intenttrack.benchmark import (
    DEFAULTS,
    MANOEUVRE_TABLE_METHODS,
    METHOD_DIFFUSE_KF,
    METHOD_KNOWN_SWITCHES,
    METHOD_KNOWN_SWITCHES_WAYPOINTS,
    METHOD_PIECEWISE,
    WAYPOINT_TABLE_METHODS,
    BenchmarkResult,
    FilterDefaults,
    ordering_confidence,
    run_benchmark,
)
from intenttrack.errors import ConfigError
from intenttrack.simulate import GeneratorKind, ScenarioConfig


def tiny_config(**overrides) -> ScenarioConfig:
    settings = dict(
        dims=2,
        bounds=[[0.0, 400.0], [0.0, 400.0]],
        generator=GeneratorKind.WAYPOINT_CV,
        seed=11,
    )
    settings.update(overrides)
    return ScenarioConfig(**settings)


def tiny_benchmark(methods, **overrides):
    return run_benchmark(
        tiny_config(**overrides), methods=methods, realisations=2, n_particles=25
    )


class TestRunBenchmark:
    def test_result_shape_and_method_order(self):
        methods = (METHOD_DIFFUSE_KF, METHOD_PIECEWISE)
        result = tiny_benchmark(methods)
        assert result.methods == methods
        assert result.position.shape == (2, 2)
        assert result.destination.shape == (2, 2)
        assert np.all(result.position > 0.0)

    def test_default_method_set_follows_generator(self):
        waypoint = tiny_benchmark(None)
        assert waypoint.methods == WAYPOINT_TABLE_METHODS
        manoeuvre = tiny_benchmark(
            None, generator=GeneratorKind.JUMP_DIFFUSION_TARGET
        )
        assert manoeuvre.methods == MANOEUVRE_TABLE_METHODS

    def test_identical_seed_reproduces_result(self):
        methods = (METHOD_DIFFUSE_KF, METHOD_PIECEWISE)
        first = tiny_benchmark(methods)
        second = tiny_benchmark(methods)
        np.testing.assert_array_equal(first.position, second.position)
        np.testing.assert_array_equal(first.destination, second.destination)

    def test_method_subset_scores_match_full_run(self):
        # Methods must see identical measurement streams, so dropping some
        # methods cannot change the scores of the ones that remain.
        full = tiny_benchmark(WAYPOINT_TABLE_METHODS)
        subset = tiny_benchmark((METHOD_DIFFUSE_KF, METHOD_KNOWN_SWITCHES))
        for name in subset.methods:
            np.testing.assert_array_equal(
                subset.position_rmse_per_run(name), full.position_rmse_per_run(name)
            )

    def test_different_seed_changes_scores(self):
        first = tiny_benchmark((METHOD_DIFFUSE_KF,))
        second = tiny_benchmark((METHOD_DIFFUSE_KF,), seed=12)
        assert not np.array_equal(first.position, second.position)

    def test_known_switch_waypoint_oracle_scores_no_destination(self):
        result = tiny_benchmark((METHOD_KNOWN_SWITCHES_WAYPOINTS, METHOD_PIECEWISE))
        assert np.all(np.isnan(result.destination[0]))
        assert np.all(np.isfinite(result.destination[1]))

    def test_unknown_method_rejected(self):
        with pytest.raises(ConfigError):
            tiny_benchmark((METHOD_DIFFUSE_KF, "vl-unknown"))

    def test_zero_measurement_noise_rejected(self):
        with pytest.raises(ConfigError):
            tiny_benchmark((METHOD_DIFFUSE_KF,), sigma_measurement=0.0)

    def test_zero_realisations_rejected(self):
        with pytest.raises(ConfigError):
            run_benchmark(tiny_config(), methods=(METHOD_DIFFUSE_KF,), realisations=0)

    def test_particle_override_changes_particle_methods_only(self):
        few = tiny_benchmark((METHOD_PIECEWISE, METHOD_KNOWN_SWITCHES))
        many = run_benchmark(
            tiny_config(),
            methods=(METHOD_PIECEWISE, METHOD_KNOWN_SWITCHES),
            realisations=2,
            n_particles=50,
        )
        assert not np.array_equal(few.position[0], many.position[0])
        np.testing.assert_array_equal(few.position[1], many.position[1])


class TestBenchmarkResult:
    def manual_result(self) -> BenchmarkResult:
        return BenchmarkResult(
            methods=("a", "b"),
            position=np.array([[1.0, 3.0], [2.0, 6.0]]),
            destination=np.array([[2.0, 4.0], [np.nan, np.nan]]),
            generator=GeneratorKind.WAYPOINT_CV,
            seed=0,
        )

    def test_mean_accessors(self):
        result = self.manual_result()
        assert result.mean_position_rmse("a") == 2.0
        assert result.mean_position_rmse("b") == 4.0
        assert result.mean_destination_rmse("a") == 3.0

    def test_unknown_method_lookup_rejected(self):
        with pytest.raises(ConfigError):
            self.manual_result().mean_position_rmse("c")

    def test_table_rows_render_missing_destination_as_none(self):
        rows = self.manual_result().table_rows()
        assert rows[0] == {"method": "a", "position_rmse": 2.0, "destination_rmse": 3.0}
        assert rows[1]["destination_rmse"] is None

    def test_table_text_marks_missing_destination(self):
        text = self.manual_result().table_text()
        lines = text.strip().split("\n")
        assert len(lines) == 3
        assert lines[2].endswith("-")
        assert "4.000" in lines[2]


class TestOrderingConfidence:
    def test_clear_separation_gives_full_confidence(self):
        result = BenchmarkResult(
            methods=("a", "b"),
            position=np.array([[1.0, 1.1, 0.9], [2.0, 2.2, 1.9]]),
            destination=np.full((2, 3), np.nan),
            generator=GeneratorKind.WAYPOINT_CV,
            seed=0,
        )
        assert ordering_confidence(result, "a", "b", "position") == 1.0
        assert ordering_confidence(result, "b", "a", "position") == 0.0

    def test_identical_methods_give_zero_confidence(self):
        # Strict inequality: a tie never counts as an ordering win.
        scores = np.array([[1.0, 2.0], [1.0, 2.0]])
        result = BenchmarkResult(
            methods=("a", "b"),
            position=scores,
            destination=np.full((2, 2), np.nan),
            generator=GeneratorKind.WAYPOINT_CV,
            seed=0,
        )
        assert ordering_confidence(result, "a", "b", "position") == 0.0

    def test_confidence_is_deterministic(self):
        result = BenchmarkResult(
            methods=("a", "b"),
            position=np.array([[1.0, 2.5, 0.9, 1.8], [1.5, 2.0, 1.1, 1.7]]),
            destination=np.full((2, 4), np.nan),
            generator=GeneratorKind.WAYPOINT_CV,
            seed=0,
        )
        first = ordering_confidence(result, "a", "b", "position", n_boot=300)
        second = ordering_confidence(result, "a", "b", "position", n_boot=300)
        assert first == second
        assert 0.0 < first < 1.0

    def test_nan_metric_rejected(self):
        result = BenchmarkResult(
            methods=("a",),
            position=np.array([[1.0, 2.0]]),
            destination=np.full((1, 2), np.nan),
            generator=GeneratorKind.WAYPOINT_CV,
            seed=0,
        )
        with pytest.raises(ConfigError):
            ordering_confidence(result, "a", "a", "destination")

    def test_unknown_metric_rejected(self):
        scores = np.array([[1.0], [2.0]])
        result = BenchmarkResult(
            methods=("a", "b"),
            position=scores,
            destination=scores,
            generator=GeneratorKind.WAYPOINT_CV,
            seed=0,
        )
        with pytest.raises(ConfigError):
            ordering_confidence(result, "a", "b", "speed")


class TestFilterDefaults:
    def test_defaults_are_frozen_and_replaceable(self):
        with pytest.raises(AttributeError):
            DEFAULTS.reversion = 1.0
        assert isinstance(DEFAULTS, FilterDefaults)
        assert DEFAULTS.n_particles == 500
