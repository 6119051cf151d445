"""Trace accumulation, outcome summaries, group statistics, and CSV export.

New infections are bucketed by the attractiveness band of the cell they
occurred in: band k collects cells with attractiveness in [2**k, 2**(k+1)).
Cell weights start at 2, so band indices start at 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class CapReached:
    """Marker: the run hit max_steps with the infection still present."""

    def __repr__(self) -> str:
        return "CapReached"


CAP_REACHED = CapReached()


def group_index(d: int) -> int:
    """Attractiveness band floor(log2 d) of a single weight; d must be >= 2."""
    d = int(d)
    if d < 2:
        raise ValueError("attractiveness must be at least 2")
    return d.bit_length() - 1


def group_indices(values) -> np.ndarray:
    """Vectorized group_index over an integer array."""
    v = np.asarray(values, dtype=np.int64)
    if v.size and v.min() < 2:
        raise ValueError("attractiveness must be at least 2")
    # exact for the integer range in play; log2 of a power of two is exact
    return np.floor(np.log2(v)).astype(np.int64)


@dataclass
class SimulationTrace:
    """Per-step history of one replicate, row 0 being the initial state.

    Arrays are indexed by step, so steps[j] == j.  new_by_group has one
    column per attractiveness band starting at band 1; its width is fixed
    for the whole run, wide enough for every grid the run can see.  tau is
    the infectious period at the start of the run and sets the super-step
    length for prevalence_walk.

    cell_log / infectious_log, when enabled, hold one row per executed step
    (row j - 1 describes step j): the post-move cell of every node and
    whether the node was infectious while that step's transmission ran.
    """

    steps: np.ndarray
    infected: np.ndarray
    uninfected: np.ndarray
    recovered: np.ndarray
    new_total: np.ndarray
    new_by_group: np.ndarray
    newly_recovered: np.ndarray
    tau: int
    extinction_step: Optional[int]
    cap_reached: bool
    cell_log: Optional[np.ndarray] = None
    infectious_log: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return int(self.infected[0] + self.uninfected[0] + self.recovered[0])

    @property
    def survivors(self) -> int:
        return int(self.uninfected[-1])

    @property
    def ever_infected(self) -> int:
        return self.n - self.survivors

    @property
    def last_step(self) -> int:
        return int(self.steps[-1])


class TraceBuilder:
    """Accumulates per-step records during a run and freezes them at the end."""

    def __init__(
        self,
        initial_counts,
        num_groups: int,
        tau: int,
        *,
        log_cells: bool = False,
    ) -> None:
        if num_groups < 1:
            raise ValueError("num_groups must be at least 1")
        u, i, r = initial_counts
        self._num_groups = num_groups
        self._tau = tau
        self._rows = [(0, i, u, r, 0, (0,) * num_groups, 0)]
        self._log_cells = log_cells
        self._cell_rows: list[np.ndarray] = []
        self._infectious_rows: list[np.ndarray] = []

    def record(self, report, counts) -> None:
        """Append one completed step's report plus the resulting counts."""
        by_group = np.asarray(report.new_infections_by_group)
        # column 0 is band 0, unreachable for weights >= 2
        if by_group[0] != 0:
            raise ValueError("new infections reported in band 0")
        bands = by_group[1:]
        if bands.size > self._num_groups and bands[self._num_groups :].any():
            raise ValueError("new infections beyond the trace's band width")
        padded = np.zeros(self._num_groups, dtype=np.int64)
        padded[: min(bands.size, self._num_groups)] = bands[: self._num_groups]
        u, i, r = counts
        self._rows.append(
            (
                report.step,
                i,
                u,
                r,
                report.new_infections_total,
                tuple(int(x) for x in padded),
                report.newly_recovered,
            )
        )

    def record_logs(self, cells: np.ndarray, infectious_mask: np.ndarray) -> None:
        if not self._log_cells:
            return
        self._cell_rows.append(np.asarray(cells, dtype=np.int64))
        self._infectious_rows.append(np.asarray(infectious_mask, dtype=bool))

    def finalize(
        self, extinction_step: Optional[int], cap_reached: bool
    ) -> SimulationTrace:
        rows = self._rows
        steps = np.array([r[0] for r in rows], dtype=np.int64)
        return SimulationTrace(
            steps=steps,
            infected=np.array([r[1] for r in rows], dtype=np.int64),
            uninfected=np.array([r[2] for r in rows], dtype=np.int64),
            recovered=np.array([r[3] for r in rows], dtype=np.int64),
            new_total=np.array([r[4] for r in rows], dtype=np.int64),
            new_by_group=np.array([r[5] for r in rows], dtype=np.int64),
            newly_recovered=np.array([r[6] for r in rows], dtype=np.int64),
            tau=self._tau,
            extinction_step=extinction_step,
            cap_reached=cap_reached,
            cell_log=np.array(self._cell_rows) if self._cell_rows else None,
            infectious_log=np.array(self._infectious_rows)
            if self._infectious_rows
            else None,
        )


def survivor_fraction(trace: SimulationTrace) -> float:
    """Fraction of the population never infected by the end of the run."""
    return trace.survivors / trace.n


def extinction_time(trace: SimulationTrace):
    """First step with zero infected, or CAP_REACHED if the run never got there."""
    idx = np.flatnonzero(trace.infected == 0)
    if idx.size == 0:
        return CAP_REACHED
    return int(trace.steps[idx[0]])


def prevalence_walk(trace: SimulationTrace, sigma: Optional[int] = None) -> np.ndarray:
    """Downsample the infected count to super-steps of sigma consecutive steps.

    Returns an (m, 2) array of (count before, count after) per super-step;
    the last super-step may be shorter if the run ended mid-window.  sigma
    defaults to the run's starting tau.
    """
    if sigma is None:
        sigma = trace.tau
    if sigma < 1:
        raise ValueError("sigma must be a positive integer")
    last = trace.last_step
    if last == 0:
        return np.empty((0, 2), dtype=np.int64)
    starts = np.arange(0, last, sigma)
    ends = np.minimum(starts + sigma, last)
    return np.stack([trace.infected[starts], trace.infected[ends]], axis=1)


def contracting_fraction(walk: np.ndarray) -> float:
    """Fraction of super-steps in which the infected count shrank."""
    if len(walk) == 0:
        raise ValueError("empty prevalence walk")
    return float(np.mean(walk[:, 1] < walk[:, 0]))


@dataclass(frozen=True)
class ReplicateSummary:
    """One row of the cross-replicate summary.

    extinction_step is None when the run hit the step cap; fired_steps
    records when each scheduled intervention fired (None = never) and is
    not part of the CSV format.
    """

    replicate: int
    seed: int
    extinction_step: Optional[int]
    ever_infected: int
    survivors: int
    fired_steps: tuple = field(default=(), compare=False)


def write_trace_csv(trace: SimulationTrace, path) -> None:
    """Write the per-step trace; header step,I,U,R,new_total,new_g1,...,recovered.

    Band columns run from new_g1 up to the trace's band width.  Lines end
    with LF on every platform.
    """
    width = trace.new_by_group.shape[1]
    header = (
        "step,I,U,R,new_total,"
        + ",".join(f"new_g{k}" for k in range(1, width + 1))
        + ",recovered"
    )
    lines = [header]
    for row in range(trace.steps.size):
        groups = ",".join(str(int(x)) for x in trace.new_by_group[row])
        lines.append(
            f"{trace.steps[row]},{trace.infected[row]},{trace.uninfected[row]},"
            f"{trace.recovered[row]},{trace.new_total[row]},{groups},"
            f"{trace.newly_recovered[row]}"
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_summary_csv(summaries, path) -> None:
    """Write one row per replicate; a capped run's extinction_step is -1."""
    lines = ["replicate,seed,extinction_step,ever_infected,survivors"]
    for s in summaries:
        ext = -1 if s.extinction_step is None else s.extinction_step
        lines.append(f"{s.replicate},{s.seed},{ext},{s.ever_infected},{s.survivors}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def causality_violations(
    cell_log: np.ndarray, infectious_log: np.ndarray, infected_at: np.ndarray
) -> np.ndarray:
    """Nodes whose recorded infection had no infectious cellmate at that step.

    Log row j - 1 describes step j.  Returns an array of offending node
    ids; empty means every infection is explained by a co-located
    infectious node.
    """
    bad = []
    for node in np.flatnonzero(infected_at >= 1):
        row = int(infected_at[node]) - 1
        if row >= cell_log.shape[0]:
            bad.append(node)
            continue
        cell = cell_log[row, node]
        if not np.any(infectious_log[row] & (cell_log[row] == cell)):
            bad.append(node)
    return np.array(bad, dtype=np.int64)


def infectious_lifetimes(infectious_log: np.ndarray) -> np.ndarray:
    """Number of steps each node spent infectious, from the per-step log."""
    return infectious_log.sum(axis=0)
