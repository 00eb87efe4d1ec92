"""Watch the posterior race between three nominated destinations.

A target flies a straight line from the launch point to one of three
candidate endpoints; the multiple-hypothesis filter is told the candidates
but not the choice. Run as ``python3 demos/destination_race.py``.
"""

from __future__ import annotations

import numpy as np

from intenttrack import (
    DEFAULTS,
    DestinationSet,
    IntentModel,
    JumpPrior,
    ModelKind,
    ModelParams,
    hypothesis_probabilities,
    position_observation,
    run_filter,
)

ENDPOINTS = np.array([[200.0, 800.0], [500.0, 800.0], [800.0, 800.0]])
START = np.array([500.0, 0.0])
SIGMA = 15.0
SPEED = 8.0


def main() -> None:
    rng = np.random.default_rng(5)
    true_idx = int(rng.integers(0, 3))
    leg = ENDPOINTS[true_idx] - START
    arrival = float(np.linalg.norm(leg) / SPEED)
    times = np.arange(0.0, arrival, 1.0)
    truth = START[None, :] + times[:, None] / arrival * leg[None, :]
    measurements = truth + SIGMA * rng.standard_normal(truth.shape)
    print(f"target secretly heads for endpoint {true_idx} "
          f"({ENDPOINTS[true_idx][0]:.0f}, {ENDPOINTS[true_idx][1]:.0f}), "
          f"arrival at {arrival:.0f} s")

    k = ENDPOINTS.shape[0] + 1
    transition = np.full((k, k), (1.0 - DEFAULTS.mh_stay) / (k - 1))
    np.fill_diagonal(transition, DEFAULTS.mh_stay)
    destinations = DestinationSet(
        positions=ENDPOINTS,
        extents=np.full_like(ENDPOINTS, DEFAULTS.mh_extent),
        transition=transition,
        initial=np.full(k, 1.0 / k),
    )
    model = IntentModel(
        ModelKind.MULTI_HYPOTHESIS,
        ModelParams(
            reversion=DEFAULTS.reversion,
            damping=DEFAULTS.damping,
            sigma_motion=DEFAULTS.sigma_motion,
            sigma_jump=DEFAULTS.sigma_jump,
            dims=2,
        ),
        jump_prior=JumpPrior(DEFAULTS.switch_shape, DEFAULTS.eager_switch_scale),
        destinations=destinations,
    )

    rows: list[tuple[float, np.ndarray]] = []
    run_filter(
        model,
        position_observation(2, SIGMA),
        times,
        measurements,
        n_particles=DEFAULTS.n_particles,
        ess_threshold=DEFAULTS.ess_threshold,
        seed=5,
        on_step=lambda pset: rows.append(
            (pset.t, hypothesis_probabilities(pset, destinations).probabilities)
        ),
    )

    print(f"{'t':>5s} {'null':>6s} {'H0':>6s} {'H1':>6s} {'H2':>6s}")
    for t, probs in rows[:: max(1, len(rows) // 12)]:
        bar = "#" * int(20 * probs[true_idx + 1])
        print(f"{t:5.0f} {probs[0]:6.3f} {probs[1]:6.3f} {probs[2]:6.3f} {probs[3]:6.3f}  {bar}")
    final = rows[-1][1]
    verdict = int(np.argmax(final[1:]))
    print(f"final call: endpoint {verdict} at {final[verdict + 1]:.3f} "
          f"({'correct' if verdict == true_idx else 'wrong'})")


if __name__ == "__main__":
    main()
