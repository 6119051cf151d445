"""Trust, but verify: exact answers for instances small enough to enumerate.

For a handful of nodes on a handful of cells every placement can be listed,
so the distribution of new infections in a single step has a closed form.
This script computes those exact quantities, then lets the full stochastic
engine replay the same step twenty thousand times and puts the empirical
frequencies next to the exact ones.
"""

import numpy as np

from epimob import (
    INFECTED,
    NEVER_INFECTED,
    UNINFECTED,
    CellGrid,
    EpidemicParams,
    PopulationState,
    enumerate_step,
    exact_meeting_probability,
    expected_new_infections_bound,
    step,
)
from epimob.rng import substream


def main() -> None:
    grid = CellGrid.from_weights([2, 2, 4])
    print(f"grid weights {grid.attractiveness.tolist()}, total {grid.total_weight}")
    print(f"meeting probability  {exact_meeting_probability(grid):.6f}  (= 0.375 exactly)")
    print(f"E[new] upper bound for 2 infected, 3 targets: "
          f"{expected_new_infections_bound(grid, 2, 3):.4f}")
    print()

    statuses = np.array([INFECTED, INFECTED, UNINFECTED, UNINFECTED], dtype=np.int8)
    beta = 0.5
    exact = enumerate_step(grid, statuses, beta)

    trials = 20_000
    params = EpidemicParams(n=4, alpha=2.5, kappa=2.0, tau=5, beta=beta)
    base_at = np.where(statuses == UNINFECTED, NEVER_INFECTED, 0).astype(np.int64)
    rng = substream(99, 0, 2)
    counts = np.zeros(exact.size, dtype=np.int64)
    state = PopulationState(
        statuses.copy(), base_at.copy(), np.zeros(4, dtype=np.int64), step=0
    )
    for _ in range(trials):
        state.status[:] = statuses
        state.infected_at[:] = base_at
        state.step = 0
        report = step(state, grid, params, rng)
        counts[report.new_infections_total] += 1

    print(f"2 infected + 2 susceptible, beta={beta}: P(k new infections in one step)")
    print(f"{'k':>3} {'exact':>10} {'engine':>10} ({trials} trials)")
    for k, p in enumerate(exact):
        print(f"{k:>3} {p:>10.5f} {counts[k] / trials:>10.5f}")
    print()
    print(f"exact PMF sums to {exact.sum():.12f}")


if __name__ == "__main__":
    main()
