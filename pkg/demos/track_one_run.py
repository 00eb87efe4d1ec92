"""Simulate one waypoint track and filter it with the piecewise-constant model.

Run as ``python3 demos/track_one_run.py``. Prints per-leg destination
estimates against the true waypoints and the overall position RMSE.
"""

from __future__ import annotations

import numpy as np

from intenttrack import (
    DEFAULTS,
    IntentModel,
    JumpPrior,
    ModelKind,
    ModelParams,
    ScenarioConfig,
    position_observation,
    run_filter,
    simulate,
    synthesize_measurements,
)


def main() -> None:
    scenario = ScenarioConfig(dims=2, n_waypoints=4, seed=7)
    rng = np.random.default_rng(scenario.seed)
    traj = simulate(scenario, rng)
    times, measurements = synthesize_measurements(traj, scenario, rng)
    print(f"simulated {times.size} measurements over {times[-1]:.0f} s, "
          f"{traj.waypoints.shape[0]} waypoints")

    model = IntentModel(
        ModelKind.PIECEWISE_CONSTANT,
        ModelParams(
            reversion=DEFAULTS.reversion,
            damping=DEFAULTS.damping,
            sigma_motion=DEFAULTS.sigma_motion,
            sigma_jump=DEFAULTS.sigma_jump,
            dims=2,
        ),
        jump_prior=JumpPrior(DEFAULTS.switch_shape, DEFAULTS.switch_scale),
    )
    run = run_filter(
        model,
        position_observation(2, scenario.sigma_measurement),
        times,
        measurements,
        n_particles=DEFAULTS.n_particles,
        ess_threshold=DEFAULTS.ess_threshold,
        seed=1,
    )

    means = np.array([record.mean for record in run.records])
    truth_positions, _, _ = traj.state_at(times)
    position_err = np.linalg.norm(
        means[:, model.position_indices] - truth_positions, axis=1
    )
    print(f"position RMSE {np.sqrt(np.mean(position_err**2)):.2f} m "
          f"(measurement noise {scenario.sigma_measurement:.0f} m)")

    # Destination estimate at the midpoint of each leg, against its waypoint.
    switch_times = [0.0, *traj.switch_times, times[-1]]
    print("leg midpoint destination estimates:")
    for leg in range(len(switch_times) - 1):
        mid = 0.5 * (switch_times[leg] + switch_times[leg + 1])
        k = int(np.searchsorted(times, mid))
        estimate = means[k, model.intent_indices]
        waypoint = traj.waypoints[min(leg, traj.waypoints.shape[0] - 1)]
        gap = float(np.linalg.norm(estimate - waypoint))
        print(f"  leg {leg}: estimate ({estimate[0]:7.1f}, {estimate[1]:7.1f})  "
              f"waypoint ({waypoint[0]:7.1f}, {waypoint[1]:7.1f})  off by {gap:6.1f} m")


if __name__ == "__main__":
    main()
