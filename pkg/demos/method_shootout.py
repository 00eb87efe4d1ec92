"""Score every shipped filtering method on a small simulated benchmark.

A desk-scale version of the full study: fewer realisations and particles,
same machinery end to end. Run as ``python3 demos/method_shootout.py``
(about half a minute).
"""

from __future__ import annotations

import numpy as np

from intenttrack import GeneratorKind, ScenarioConfig, run_benchmark


def print_table(title: str, result) -> None:
    print(f"\n{title}")
    print(f"  {'method':20s} {'position RMSE':>14s} {'destination RMSE':>17s}")
    for name in result.methods:
        position = result.position_rmse_per_run(name).mean()
        destination = result.destination_rmse_per_run(name)
        dest_text = f"{destination.mean():14.1f} m" if not np.isnan(destination).any() else "  known exactly"
        print(f"  {name:20s} {position:11.2f} m  {dest_text:>17s}")


def main() -> None:
    realisations, particles = 6, 150
    print(f"{realisations} realisations per table, {particles} particles "
          "(the full study uses 50 and 500)")

    waypoint = run_benchmark(
        ScenarioConfig(dims=3, seed=11),
        realisations=realisations,
        n_particles=particles,
    )
    print_table("nominal waypoint tracks:", waypoint)

    manoeuvre = run_benchmark(
        ScenarioConfig(dims=3, seed=11, generator=GeneratorKind.JUMP_DIFFUSION_TARGET),
        realisations=realisations,
        n_particles=particles,
    )
    print_table("fast-manoeuvring tracks (velocity kicks):", manoeuvre)


if __name__ == "__main__":
    main()
