"""End-to-end tests for the command-line interface."""

import numpy as np
import pytest

from intenttrack.cli import EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC, EXIT_OK, main
from intenttrack.filter import position_observation, run_conditional_kalman
from intenttrack.io import ModelConfig, read_positions_csv

TINY_SCENARIO = "\n".join(
    [
        "[scenario]",
        "dims = 2",
        "n_waypoints = 2",
        "bounds = [[0.0, 400.0], [0.0, 400.0]]",
        "max_duration = 120.0",
        "seed = 21",
    ]
)


def run_cli(*argv) -> int:
    return main(list(argv))


def write_scenario_config(tmp_path, extra_lines=()):
    path = tmp_path / "config.toml"
    path.write_text(TINY_SCENARIO + "\n" + "\n".join(extra_lines) + "\n")
    return path


def simulate_measurements(tmp_path):
    config = write_scenario_config(tmp_path)
    out = tmp_path / "sim"
    assert run_cli("simulate", "--config", str(config), "--out-dir", str(out)) == EXIT_OK
    return config, out / "measurements.csv"


def read_bytes_map(directory):
    return {path.name: path.read_bytes() for path in sorted(directory.iterdir())}


class TestExitCodes:
    def test_simulate_success(self, tmp_path, capsys):
        config = write_scenario_config(tmp_path)
        out = tmp_path / "out"
        assert run_cli("simulate", "--config", str(config), "--out-dir", str(out)) == EXIT_OK
        printed = capsys.readouterr().out.splitlines()
        assert [p.split("/")[-1] for p in printed] == [
            "trajectory.csv",
            "measurements.csv",
            "truth.json",
        ]
        for name in printed:
            assert (out / name.split("/")[-1]).exists()

    def test_bad_config_file_exits_2(self, tmp_path, capsys):
        config = tmp_path / "broken.toml"
        config.write_text("[scenario\nseed = 1")
        assert run_cli("simulate", "--config", str(config)) == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_track_without_measurements_exits_2(self, tmp_path, capsys):
        assert run_cli("track", "--out-dir", str(tmp_path)) == EXIT_CONFIG
        assert "no measurement file" in capsys.readouterr().err

    def test_query_region_without_region_exits_2(self, tmp_path):
        _, measurements = simulate_measurements(tmp_path)
        assert (
            run_cli(
                "query-region",
                "--measurements",
                str(measurements),
                "--out-dir",
                str(tmp_path / "q"),
            )
            == EXIT_CONFIG
        )

    def test_missing_measurement_file_exits_3(self, tmp_path, capsys):
        assert (
            run_cli(
                "track",
                "--measurements",
                str(tmp_path / "absent.csv"),
                "--out-dir",
                str(tmp_path),
            )
            == EXIT_DATA
        )
        assert "data error" in capsys.readouterr().err

    def test_malformed_row_exits_3_with_line_number(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("t,x\n0.0,1.0\n1.0,oops\n")
        assert (
            run_cli("track", "--measurements", str(bad), "--out-dir", str(tmp_path))
            == EXIT_DATA
        )
        assert ":3:" in capsys.readouterr().err

    def test_overflowing_measurement_exits_4(self, tmp_path, capsys):
        huge = tmp_path / "huge.csv"
        huge.write_text("t,x\n0.0,0.0\n1.0,1e308\n")
        with np.errstate(over="ignore"):
            code = run_cli(
                "track",
                "--model",
                "baseline",
                "--measurements",
                str(huge),
                "--out-dir",
                str(tmp_path),
            )
        assert code == EXIT_NUMERIC
        assert "numeric failure" in capsys.readouterr().err

    def test_benchmark_without_seed_exits_2(self, tmp_path, capsys):
        config = tmp_path / "config.toml"
        config.write_text("[benchmark]\nrealisations = 1\n")
        assert run_cli("benchmark", "--config", str(config)) == EXIT_CONFIG
        assert "explicit seed" in capsys.readouterr().err


class TestSimulate:
    def test_byte_identical_across_runs(self, tmp_path):
        config = write_scenario_config(tmp_path)
        first = tmp_path / "a"
        second = tmp_path / "b"
        for out in (first, second):
            assert run_cli("simulate", "--config", str(config), "--out-dir", str(out)) == EXIT_OK
        assert read_bytes_map(first) == read_bytes_map(second)

    def test_seed_flag_changes_output(self, tmp_path):
        config = write_scenario_config(tmp_path)
        base = tmp_path / "a"
        reseeded = tmp_path / "b"
        assert run_cli("simulate", "--config", str(config), "--out-dir", str(base)) == EXIT_OK
        assert (
            run_cli(
                "simulate", "--config", str(config), "--out-dir", str(reseeded), "--seed", "99"
            )
            == EXIT_OK
        )
        assert (base / "truth.json").read_bytes() != (reseeded / "truth.json").read_bytes()


class TestTrack:
    def test_row_count_and_determinism(self, tmp_path):
        _, measurements = simulate_measurements(tmp_path)
        times, _ = read_positions_csv(measurements)
        outs = [tmp_path / "t1", tmp_path / "t2"]
        for out in outs:
            assert (
                run_cli(
                    "track",
                    "--measurements",
                    str(measurements),
                    "--particles",
                    "32",
                    "--seed",
                    "5",
                    "--out-dir",
                    str(out),
                )
                == EXIT_OK
            )
        assert read_bytes_map(outs[0]) == read_bytes_map(outs[1])
        lines = (outs[0] / "track.csv").read_text().splitlines()
        assert len(lines) == 1 + len(times)

    def test_baseline_track_matches_reference_kalman(self, tmp_path):
        _, measurements = simulate_measurements(tmp_path)
        out = tmp_path / "kf"
        assert (
            run_cli(
                "track",
                "--model",
                "baseline",
                "--measurements",
                str(measurements),
                "--out-dir",
                str(out),
            )
            == EXIT_OK
        )
        rows = (out / "track.csv").read_text().splitlines()[1:]
        written_means = np.array([[float(v) for v in row.split(",")[1:7]] for row in rows])

        times, values = read_positions_csv(measurements)
        model = ModelConfig(kind="baseline", dims=2).build()
        obs = position_observation(2, 15.0)
        reference = run_conditional_kalman(
            model, obs, times, values, schedule=[],
            intent_prior_std=1000.0, velocity_prior_std=60.0,
        )
        reference_means = np.array([record.mean for record in reference.records])
        np.testing.assert_allclose(written_means, reference_means, rtol=0.0, atol=1e-10)

    def test_region_query_writes_one_record_per_step(self, tmp_path):
        _, measurements = simulate_measurements(tmp_path)
        out = tmp_path / "q"
        assert (
            run_cli(
                "query-region",
                "--measurements",
                str(measurements),
                "--region",
                "0,400,0,400",
                "--particles",
                "32",
                "--seed",
                "5",
                "--out-dir",
                str(out),
            )
            == EXIT_OK
        )
        times, _ = read_positions_csv(measurements)
        lines = (out / "queries.csv").read_text().splitlines()
        assert lines[0] == "t,query,value"
        assert len(lines) == 1 + len(times)
        probabilities = [float(line.split(",")[2]) for line in lines[1:]]
        assert all(0.0 <= p <= 1.0 for p in probabilities)

    def test_point_query_records_density(self, tmp_path):
        _, measurements = simulate_measurements(tmp_path)
        out = tmp_path / "p"
        assert (
            run_cli(
                "query-point",
                "--measurements",
                str(measurements),
                "--point",
                "200,200",
                "--particles",
                "32",
                "--seed",
                "5",
                "--out-dir",
                str(out),
            )
            == EXIT_OK
        )
        lines = (out / "queries.csv").read_text().splitlines()
        assert all(float(line.split(",")[2]) >= 0.0 for line in lines[1:])


class TestBenchmark:
    def test_waypoint_table_has_seven_rows(self, tmp_path):
        config = write_scenario_config(
            tmp_path, ("[benchmark]", "realisations = 2", "[filter]", "particles = 16")
        )
        out = tmp_path / "bench"
        assert run_cli("benchmark", "--config", str(config), "--out-dir", str(out)) == EXIT_OK
        lines = (out / "benchmark.csv").read_text().splitlines()
        assert lines[0] == "method,position_rmse,destination_rmse"
        assert len(lines) == 1 + 7
        assert lines[1].startswith("vl-d-kf,")
        assert (out / "benchmark.txt").read_text().count("vl-") == 7

    def test_manoeuvre_table_has_four_rows(self, tmp_path):
        config = write_scenario_config(
            tmp_path,
            (
                'generator = "jump_diffusion_target"',
                "[benchmark]",
                "realisations = 2",
                "[filter]",
                "particles = 16",
            ),
        )
        out = tmp_path / "bench"
        assert run_cli("benchmark", "--config", str(config), "--out-dir", str(out)) == EXIT_OK
        lines = (out / "benchmark.csv").read_text().splitlines()
        assert len(lines) == 1 + 4

    def test_byte_identical_across_runs(self, tmp_path):
        config = write_scenario_config(
            tmp_path, ("[benchmark]", "realisations = 2", "[filter]", "particles = 16")
        )
        outs = [tmp_path / "b1", tmp_path / "b2"]
        for out in outs:
            assert run_cli("benchmark", "--config", str(config), "--out-dir", str(out)) == EXIT_OK
        assert read_bytes_map(outs[0]) == read_bytes_map(outs[1])

    def test_particles_flag_changes_particle_methods(self, tmp_path):
        config = write_scenario_config(
            tmp_path, ("[benchmark]", "realisations = 1", "[filter]", "particles = 16")
        )
        outs = [tmp_path / "b1", tmp_path / "b2"]
        assert run_cli("benchmark", "--config", str(config), "--out-dir", str(outs[0])) == EXIT_OK
        assert (
            run_cli(
                "benchmark", "--config", str(config), "--out-dir", str(outs[1]),
                "--particles", "24",
            )
            == EXIT_OK
        )
        first = (outs[0] / "benchmark.csv").read_text().splitlines()
        second = (outs[1] / "benchmark.csv").read_text().splitlines()
        assert first[1] == second[1]
        assert first[2] != second[2]
