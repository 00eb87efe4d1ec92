"""Command-line interface: simulate, track, benchmark, and intent queries.

Every command is a pure function of (config, flags) to output bytes:
fixed seeds give byte-identical files. Exit codes: 0 success, 2 config
error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import io as runio
from .benchmark import run_benchmark
from .errors import (
    ConfigError,
    ContractViolationError,
    DataError,
    DimensionError,
    NumericError,
)
from .filter import (
    GaussianMixture,
    position_observation,
    posterior_mixture,
    run_conditional_kalman,
    run_filter,
)
from .models import ModelKind
from .query import destination_marginal, point_intent_density, region_probability
from .simulate import simulate, synthesize_measurements

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intenttrack",
        description="Intent-aware tracking: simulation, filtering, queries, benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="TOML run config")
        p.add_argument("--seed", type=int, help="override scenario and filter seeds")
        p.add_argument("--out-dir", help="output directory (default from config)")

    def filtering(p: argparse.ArgumentParser) -> None:
        p.add_argument("--model", help="filter model kind")
        p.add_argument("--particles", type=int, help="particle count")
        p.add_argument("--ess-threshold", type=float, help="resampling trigger fraction")
        p.add_argument("--measurements", help="measurement CSV to filter")
        p.add_argument("--region", help='destination region "xlo,xhi,ylo,yhi[,zlo,zhi]"')
        p.add_argument("--point", help='destination point "x,y[,z]"')

    common(sub.add_parser("simulate", help="write a simulated track and measurements"))

    track = sub.add_parser("track", help="filter a measurement file")
    common(track)
    filtering(track)

    bench = sub.add_parser("benchmark", help="score methods over simulated realisations")
    common(bench)
    bench.add_argument("--particles", type=int, help="particle count")

    region = sub.add_parser("query-region", help="track and report region probabilities")
    common(region)
    filtering(region)

    point = sub.add_parser("query-point", help="track and report point intent densities")
    common(point)
    filtering(point)
    return parser


def _load_config(args: argparse.Namespace) -> runio.RunConfig:
    config = runio.read_config(args.config) if args.config else runio.default_config()
    if args.seed is not None:
        config = dataclasses.replace(
            config,
            scenario=dataclasses.replace(config.scenario, seed=args.seed),
            filter=dataclasses.replace(config.filter, seed=args.seed),
            seed_given=True,
        )
    if args.out_dir is not None:
        config = dataclasses.replace(
            config, io=dataclasses.replace(config.io, out_dir=args.out_dir)
        )
    for name, section, key in (
        ("model", "model", "kind"),
        ("particles", "filter", "particles"),
        ("ess_threshold", "filter", "ess_threshold"),
        ("measurements", "io", "measurements"),
    ):
        value = getattr(args, name, None)
        if value is not None:
            config = dataclasses.replace(
                config,
                **{section: dataclasses.replace(getattr(config, section), **{key: value})},
            )
    return config


def _out_dir(config: runio.RunConfig) -> Path:
    out = Path(config.io.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(config: runio.RunConfig) -> list[Path]:
    """Write trajectory.csv, measurements.csv, and truth.json."""
    scenario = config.scenario
    rng = np.random.default_rng(scenario.seed)
    traj = simulate(scenario, rng)
    times, measurements = synthesize_measurements(traj, scenario, rng)
    out = _out_dir(config)
    paths = [out / "trajectory.csv", out / "measurements.csv", out / "truth.json"]
    runio.write_trajectory_csv(paths[0], traj)
    runio.write_measurements_csv(paths[1], times, measurements)
    runio.write_truth_json(paths[2], traj, scenario)
    return paths


def _query_probes(config: runio.RunConfig, args: argparse.Namespace, dims: int):
    """Per-step query evaluators keyed by output label."""
    probes = []
    region_text = getattr(args, "region", None)
    point_text = getattr(args, "point", None)
    if args.command == "query-region" and region_text is None:
        raise ConfigError("query-region requires --region")
    if args.command == "query-point" and point_text is None:
        raise ConfigError("query-point requires --point")
    if region_text is not None:
        region = runio.parse_region(region_text, dims)
        probes.append(("region", lambda mix: region_probability(mix, region)))
    if point_text is not None:
        point = runio.parse_point(point_text, dims)
        probes.append(("point", lambda mix: point_intent_density(mix, point)))
    return probes


def cmd_track(config: runio.RunConfig, args: argparse.Namespace) -> list[Path]:
    """Filter a measurement CSV; write track.csv and optional queries.csv."""
    if config.io.measurements is None:
        raise ConfigError("no measurement file: set --measurements or [io] measurements")
    times, measurements = runio.read_positions_csv(config.io.measurements)
    dims = measurements.shape[1]
    model_config = config.model
    if model_config.dims != dims:
        model_config = dataclasses.replace(model_config, dims=dims)
    model = model_config.build()
    obs = position_observation(dims, config.observation.sigma)
    probes = _query_probes(config, args, dims)
    queries: list[tuple[float, str, float]] = []
    settings = config.filter

    def record_queries(t: float, mixture) -> None:
        marginal = destination_marginal(mixture)
        for label, evaluate in probes:
            queries.append((t, label, float(evaluate(marginal))))

    def single(belief) -> GaussianMixture:
        return GaussianMixture(
            weights=np.array([1.0]), means=belief.mean[None], covs=belief.cov[None]
        )

    if model.kind is ModelKind.BASELINE:
        run = run_conditional_kalman(
            model,
            obs,
            times,
            measurements,
            schedule=[],
            intent_prior_std=settings.intent_prior_std,
            velocity_prior_std=settings.velocity_prior_std,
            on_step=(lambda t, belief: record_queries(t, single(belief)))
            if probes
            else None,
        )
    else:
        run = run_filter(
            model,
            obs,
            times,
            measurements,
            n_particles=settings.particles,
            ess_threshold=settings.ess_threshold,
            seed=settings.seed,
            intent_prior_std=settings.intent_prior_std,
            velocity_prior_std=settings.velocity_prior_std,
            on_step=(lambda pset: record_queries(pset.t, posterior_mixture(pset)))
            if probes
            else None,
        )
    out = _out_dir(config)
    paths = [out / "track.csv"]
    runio.write_track_csv(paths[0], run, dims)
    if probes:
        paths.append(out / "queries.csv")
        runio.write_queries_csv(paths[1], queries)
    return paths


def cmd_benchmark(config: runio.RunConfig) -> list[Path]:
    """Run the method comparison and write benchmark.csv / benchmark.txt."""
    if not config.seed_given:
        raise ConfigError("benchmark runs need an explicit seed (--seed or config)")
    result = run_benchmark(
        config.scenario,
        methods=config.benchmark.methods,
        realisations=config.benchmark.realisations,
        n_particles=config.filter.particles,
    )
    out = _out_dir(config)
    paths = [out / "benchmark.csv", out / "benchmark.txt"]
    runio.write_benchmark_csv(paths[0], result)
    runio.write_benchmark_text(paths[1], result)
    return paths


def main(argv: "list[str] | None" = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args)
        if args.command == "simulate":
            paths = cmd_simulate(config)
        elif args.command in ("track", "query-region", "query-point"):
            paths = cmd_track(config, args)
        elif args.command == "benchmark":
            paths = cmd_benchmark(config)
        else:  # pragma: no cover - argparse enforces the choices
            raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ContractViolationError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, DimensionError, OSError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
