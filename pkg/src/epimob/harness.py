"""Monte Carlo replication runner: seeding, parallelism, aggregation, output.

Each replicate r of a run with master seed s consumes four random streams
derived purely from (s, r): grid, init, movement, transmission.  Replicates
therefore produce identical bytes whether they run serially or spread over
worker processes, and the manifest (config text plus master seed) fully
determines every output byte except wall-clock metadata.
"""

from __future__ import annotations

import json
import math
import multiprocessing
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from importlib import metadata as _importlib_metadata
from typing import Optional

import numpy as np

from .attractiveness import EpidemicParams, build_grid
from .dynamics import INFECTED, init_population, step
from .metrics import (
    ReplicateSummary,
    SimulationTrace,
    TraceBuilder,
    write_summary_csv,
    write_trace_csv,
)
from .rng import ReplicateStreams, derive_seed
from .scenario import InterventionSchedule, ScenarioConfig, apply_intervention, serialize_config


def engine_version() -> str:
    try:
        return _importlib_metadata.version("epimob")
    except _importlib_metadata.PackageNotFoundError:
        return "unknown"


@dataclass
class RunManifest:
    """Everything needed to reproduce a run, plus wall-clock metadata.

    derived_seeds[r] is a pure function of (master_seed, r).  started_at
    and wall_seconds are informational only and excluded from the
    determinism guarantee.
    """

    engine_version: str
    master_seed: int
    replications: int
    derived_seeds: list
    config_text: str
    started_at: str
    wall_seconds: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass(frozen=True)
class StatSummary:
    """Mean and sort-based quantiles of one outcome across replicates."""

    mean: float
    q10: float
    median: float
    q90: float


@dataclass(frozen=True)
class AggregateStats:
    replications: int
    extinct_count: int
    cap_count: int
    extinction_time: StatSummary
    survivor_fraction: StatSummary
    ever_infected: StatSummary


@dataclass
class RunResult:
    manifest: RunManifest
    summaries: list
    traces: list
    aggregate: AggregateStats


def sorted_quantile(values, q: float) -> float:
    """Linear-interpolation quantile on the sorted values (reference method)."""
    xs = np.sort(np.asarray(values, dtype=np.float64))
    if xs.size == 0:
        return math.nan
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    pos = q * (xs.size - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, xs.size - 1)
    frac = pos - lo
    return float(xs[lo] * (1.0 - frac) + xs[hi] * frac)


def _stat_summary(values) -> StatSummary:
    values = list(values)
    if not values:
        nan = math.nan
        return StatSummary(nan, nan, nan, nan)
    return StatSummary(
        mean=float(np.mean(values)),
        q10=sorted_quantile(values, 0.10),
        median=sorted_quantile(values, 0.50),
        q90=sorted_quantile(values, 0.90),
    )


def aggregate_stats(summaries, n: int) -> AggregateStats:
    """Cross-replicate outcome statistics; extinction stats cover extinct runs only."""
    extinct = [s.extinction_step for s in summaries if s.extinction_step is not None]
    return AggregateStats(
        replications=len(summaries),
        extinct_count=len(extinct),
        cap_count=len(summaries) - len(extinct),
        extinction_time=_stat_summary(extinct),
        survivor_fraction=_stat_summary(s.survivors / n for s in summaries),
        ever_infected=_stat_summary(s.ever_infected for s in summaries),
    )


def _group_width(params: EpidemicParams, schedule: InterventionSchedule) -> int:
    """Band columns needed to cover every grid the run can see.

    Overlays apply cumulatively in schedule order, so the width is the
    maximum over the whole parameter chain.
    """
    width = int(params.max_attractiveness).bit_length() - 1
    current = params
    for trig in schedule:
        current = trig.overlay.merge(current)
        width = max(width, int(current.max_attractiveness).bit_length() - 1)
    return width


def run_replicate(config: ScenarioConfig, replicate: int) -> tuple[ReplicateSummary, SimulationTrace]:
    """Run one replicate to extinction or the step cap.

    Triggers are evaluated at step 0 and after every completed step; each
    fires at most once, swapping in merged params and a fresh grid.
    """
    streams = ReplicateStreams.from_seed(config.seed, replicate)
    params = config.params
    grid = build_grid(params, streams.grid)
    state = init_population(params, streams.init)
    builder = TraceBuilder(
        state.counts(),
        _group_width(params, config.schedule),
        params.tau,
        log_cells=config.log_cells,
    )
    fired: list = [None] * len(config.schedule)
    counts = state.counts()

    def fire_due() -> None:
        nonlocal params, grid
        for idx, trig in enumerate(config.schedule):
            if fired[idx] is None and trig.condition.met(state.step, counts.infected, params.n):
                params, grid = apply_intervention(state, grid, params, trig.overlay, streams.grid)
                fired[idx] = state.step

    fire_due()
    while counts.infected > 0 and state.step < params.max_steps:
        was_infectious = state.status == INFECTED
        report = step(state, grid, params, streams)
        counts = state.counts()
        builder.record(report, counts)
        if config.log_cells:
            builder.record_logs(state.current_cell.copy(), was_infectious)
        fire_due()

    extinct = counts.infected == 0
    extinction_step = state.step if extinct else None
    trace = builder.finalize(extinction_step=extinction_step, cap_reached=not extinct)
    summary = ReplicateSummary(
        replicate=replicate,
        seed=derive_seed(config.seed, replicate),
        extinction_step=extinction_step,
        ever_infected=params.n - counts.uninfected,
        survivors=counts.uninfected,
        fired_steps=tuple(fired),
    )
    return summary, trace


def _replicate_job(args: tuple[ScenarioConfig, int]):
    return run_replicate(*args)


def run_replications(config: ScenarioConfig, workers: int = 1) -> RunResult:
    """Run every replicate, aggregate outcomes, and write files if configured.

    With workers > 1, replicates are distributed over processes; outputs
    are identical to a serial run because each replicate's streams depend
    only on (master seed, replicate index).  When config.out_dir is set,
    writes trace_<replicate>.csv per replicate plus summary.csv and
    manifest.json.
    """
    started_at = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    jobs = [(config, r) for r in range(config.replications)]
    if workers > 1 and config.replications > 1:
        methods = multiprocessing.get_all_start_methods()
        ctx = multiprocessing.get_context("fork" if "fork" in methods else None)
        with ProcessPoolExecutor(
            max_workers=min(workers, config.replications), mp_context=ctx
        ) as pool:
            results = list(pool.map(_replicate_job, jobs))
    else:
        results = [run_replicate(config, r) for r in range(config.replications)]
    summaries = [s for s, _ in results]
    traces = [t for _, t in results]

    manifest = RunManifest(
        engine_version=engine_version(),
        master_seed=config.seed,
        replications=config.replications,
        derived_seeds=[derive_seed(config.seed, r) for r in range(config.replications)],
        config_text=serialize_config(config),
        started_at=started_at,
        wall_seconds=0.0,
    )

    manifest.wall_seconds = time.perf_counter() - t0
    if config.out_dir is not None:
        digits = max(4, len(str(config.replications - 1)))
        os.makedirs(config.out_dir, exist_ok=True)
        for summary, trace in results:
            name = f"trace_{summary.replicate:0{digits}d}.csv"
            write_trace_csv(trace, os.path.join(config.out_dir, name))
        write_summary_csv(summaries, os.path.join(config.out_dir, "summary.csv"))
        with open(
            os.path.join(config.out_dir, "manifest.json"), "w", encoding="utf-8", newline=""
        ) as fh:
            fh.write(manifest.to_json() + "\n")

    aggregate = aggregate_stats(summaries, config.params.n)
    return RunResult(manifest=manifest, summaries=summaries, traces=traces, aggregate=aggregate)
