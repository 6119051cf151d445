"""Acceptance battery: eight end-to-end gates on engine behavior and speed.

Each test prints exactly one [PASS]/[FAIL] line with its measured numbers
(run pytest with -s to see the lines as they happen).  Seeds are pinned, so
every gate is deterministic; tolerances are part of each gate's statement.
"""

import dataclasses
import json
import math
import time

import numpy as np
from scipy import stats as scipy_stats

from epimob import (
    INFECTED,
    NEVER_INFECTED,
    RECOVERED,
    UNINFECTED,
    CellGrid,
    EpidemicParams,
    InterventionSchedule,
    ParamOverlay,
    PopulationState,
    PrevalenceReached,
    ReplicateStreams,
    ScenarioConfig,
    Trigger,
    build_grid,
    choose_cells,
    enumerate_step,
    init_population,
    preset_emerging,
    preset_industrialized,
    run_replications,
    sparse_regime_check,
    step,
)
from epimob.rng import substream


def _verdict(num: int, name: str, ok: bool, detail: str) -> bool:
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] criterion {num} ({name}): {detail}")
    return ok


def test_criterion_1_occupancy_tracks_attractiveness():
    # n=1e5, kappa=1, alpha=2.8; one movement substep per grid, 50 redraws;
    # mean cell occupancy must be linear in attractiveness through the origin
    t0 = time.perf_counter()
    params = EpidemicParams(n=100_000, alpha=2.8, kappa=1.0, tau=1)
    top = params.max_attractiveness
    occupancy_by_weight = np.zeros(top + 1)
    cells_by_weight = np.zeros(top + 1)
    for r in range(50):
        streams = ReplicateStreams.from_seed(8101, r)
        grid = build_grid(params, streams.grid)
        cells = choose_cells(grid, streams.movement, params.n)
        occupancy = np.bincount(cells, minlength=grid.num_cells)
        occupancy_by_weight += np.bincount(
            grid.attractiveness, weights=occupancy, minlength=top + 1
        )
        cells_by_weight += np.bincount(grid.attractiveness, minlength=top + 1)
    seen = cells_by_weight > 0
    weights = np.arange(top + 1)[seen]
    mean_occupancy = occupancy_by_weight[seen] / cells_by_weight[seen]
    fit = scipy_stats.linregress(weights, mean_occupancy)
    r_squared = fit.rvalue**2
    intercept_z = abs(fit.intercept) / fit.intercept_stderr
    elapsed = time.perf_counter() - t0
    ok = r_squared > 0.99 and intercept_z <= 3.0 and elapsed < 30.0
    assert _verdict(
        1,
        "occupancy proportionality",
        ok,
        f"R2={r_squared:.5f} intercept={fit.intercept:+.3f} "
        f"({intercept_z:.2f} se) elapsed={elapsed:.1f}s",
    )


def test_criterion_2_engine_matches_exact_enumeration():
    # 20 random tiny instances; single-step new-infection frequencies over
    # 1e5 engine trials each must sit within 3 standard errors of the exact PMF
    t0 = time.perf_counter()
    gen = np.random.default_rng(8102)
    trials = 100_000
    worst_z = 0.0
    checked = 0
    ok = True
    for idx in range(20):
        num_cells = int(gen.integers(1, 7))
        weights = [int(w) for w in gen.integers(2, 9, size=num_cells)]
        grid = CellGrid.from_weights(weights)
        n_nodes = int(gen.integers(2, 7))
        i_count = int(gen.integers(1, n_nodes))
        u_count = int(gen.integers(1, n_nodes - i_count + 1))
        r_count = n_nodes - i_count - u_count
        beta = 0.5 if idx % 2 == 0 else 1.0
        statuses = np.array(
            [INFECTED] * i_count + [UNINFECTED] * u_count + [RECOVERED] * r_count,
            dtype=np.int8,
        )
        exact = enumerate_step(grid, statuses, beta)

        params = EpidemicParams(
            n=n_nodes, alpha=2.5, kappa=8 / n_nodes, tau=10, beta=beta
        )
        base_infected_at = np.where(
            statuses == UNINFECTED, NEVER_INFECTED, 0
        ).astype(np.int64)
        state = PopulationState(
            statuses.copy(),
            base_infected_at.copy(),
            np.zeros(n_nodes, dtype=np.int64),
            step=0,
        )
        rng = substream(8102, idx, 2)
        counts = np.zeros(exact.size, dtype=np.int64)
        for _ in range(trials):
            state.status[:] = statuses
            state.infected_at[:] = base_infected_at
            state.step = 0
            report = step(state, grid, params, rng)
            counts[report.new_infections_total] += 1
        freq = counts / trials
        for c, p in enumerate(exact):
            se = math.sqrt(p * (1 - p) / trials)
            gap = abs(freq[c] - p)
            if se > 0:
                worst_z = max(worst_z, gap / se)
            ok = ok and gap <= 3 * se + 1e-12
            checked += 1
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 120.0
    assert _verdict(
        2,
        "exact oracle agreement",
        ok,
        f"instances=20 outcomes={checked} worst_z={worst_z:.2f} elapsed={elapsed:.1f}s",
    )


def test_criterion_3_sparse_regime_zero_infection_floor():
    # n=1e6 grid, 10 infected vs 10 targets (product 100 << n^0.6); over 1e4
    # single-step trials the zero-infection frequency must clear 1 - 2*mu
    t0 = time.perf_counter()
    params = EpidemicParams(n=1_000_000, alpha=2.8, kappa=1.0, tau=2)
    grid = build_grid(params, substream(8103, 0, 0))
    result = sparse_regime_check(
        grid,
        10,
        10,
        n=params.n,
        epsilon=0.3,
        trials=10_000,
        rng=substream(8103, 0, 2),
        alpha=params.alpha,
    )
    elapsed = time.perf_counter() - t0
    floor = 1.0 - 2.0 * result.mu
    ok = (
        result.zero_infection_frequency >= floor
        and result.zero_infection_frequency > 0.97
        and elapsed < 300.0
    )
    assert _verdict(
        3,
        "sparse regime floor",
        ok,
        f"zero_freq={result.zero_infection_frequency:.5f} mu={result.mu:.2e} "
        f"floor={floor:.5f} elapsed={elapsed:.1f}s",
    )


def test_criterion_4_emerging_outbreaks_leave_survivors():
    # n=1e4 loose-mixing scenario, 100 replicates: nearly all go extinct
    # before the cap and nearly all extinct runs keep >= 10 never-infected
    t0 = time.perf_counter()
    params = EpidemicParams(
        n=10_000,
        alpha=2.8,
        kappa=1.0,
        tau=2,
        beta=1.0,
        initial_infected=10,
        max_steps=10_000,
    )
    config = ScenarioConfig(params=params, seed=8104, replications=100)
    result = run_replications(config)
    extinct = [s for s in result.summaries if s.extinction_step is not None]
    survivors_ok = sum(1 for s in extinct if s.survivors >= 10)
    frac = survivors_ok / len(extinct) if extinct else 0.0
    elapsed = time.perf_counter() - t0
    ok = len(extinct) >= 95 and frac >= 0.90 and elapsed < 600.0
    assert _verdict(
        4,
        "emerging outbreak survivors",
        ok,
        f"extinct={len(extinct)}/100 survivors>=10 in {survivors_ok}/{len(extinct)} "
        f"median_survivors={np.median([s.survivors for s in extinct]):.0f} "
        f"elapsed={elapsed:.1f}s",
    )


def test_criterion_5_industrialized_outbreaks_stay_small_and_short():
    # n=1e5 dispersed scenario, 100 replicates: extinction within 200 steps
    # and total infections below (log2 n)^3 in at least 95 runs each
    t0 = time.perf_counter()
    params = EpidemicParams(
        n=100_000,
        alpha=6.0,
        kappa=16.0,
        tau=2,
        beta=1.0,
        initial_infected=12,
        max_steps=10_000,
    )
    config = ScenarioConfig(params=params, seed=8105, replications=100)
    result = run_replications(config)
    fast = sum(
        1
        for s in result.summaries
        if s.extinction_step is not None and s.extinction_step <= 200
    )
    cap = math.log2(params.n) ** 3
    small = sum(1 for s in result.summaries if s.ever_infected <= cap)
    elapsed = time.perf_counter() - t0
    ok = fast >= 95 and small >= 95 and elapsed < 600.0
    assert _verdict(
        5,
        "industrialized containment",
        ok,
        f"extinct<=200 in {fast}/100, ever_infected<={cap:.0f} in {small}/100, "
        f"median_ever={np.median([s.ever_infected for s in result.summaries]):.0f} "
        f"elapsed={elapsed:.1f}s",
    )


def test_criterion_6_awareness_trigger_cuts_infections_fivefold():
    # paired seeds, 50 replicates: switching to the dispersed environment at
    # 2% prevalence must cut the median outbreak size at least 5x
    t0 = time.perf_counter()
    base = preset_emerging(10_000)
    baseline = dataclasses.replace(base, seed=8106, replications=50)
    trigger = Trigger(
        PrevalenceReached(0.02), ParamOverlay(alpha=6.0, kappa=16.0, tau=2)
    )
    aware = dataclasses.replace(
        baseline, schedule=InterventionSchedule((trigger,))
    )
    ever_base = np.array([s.ever_infected for s in run_replications(baseline).summaries])
    ever_aware = np.array([s.ever_infected for s in run_replications(aware).summaries])
    med_base = float(np.median(ever_base))
    med_aware = float(np.median(ever_aware))
    reduction = med_base / med_aware if med_aware > 0 else math.inf
    elapsed = time.perf_counter() - t0
    ok = reduction >= 5.0 and elapsed < 600.0
    assert _verdict(
        6,
        "awareness intervention",
        ok,
        f"median_ever baseline={med_base:.0f} aware={med_aware:.0f} "
        f"reduction={reduction:.1f}x elapsed={elapsed:.1f}s",
    )


def test_criterion_7_band_infections_decay_at_peak():
    # industrialized runs, 50 replicates: at each run's peak-prevalence step,
    # mean new infections per attractiveness band must not increase with the
    # band index, judged on bands with at least 100 pooled samples
    t0 = time.perf_counter()
    config = dataclasses.replace(
        preset_industrialized(100_000), seed=8107, replications=50
    )
    result = run_replications(config)
    width = result.traces[0].new_by_group.shape[1]
    totals = np.zeros(width)
    for trace in result.traces:
        peak = int(np.argmax(trace.infected))
        totals += trace.new_by_group[peak]
    means = totals / len(result.traces)
    eligible = np.flatnonzero(totals >= 100)
    monotone = all(
        means[a] >= means[b] for a, b in zip(eligible, eligible[1:])
    )
    elapsed = time.perf_counter() - t0
    ok = monotone and elapsed < 600.0
    bands = ", ".join(
        f"g{k + 1}={means[k]:.1f}{'*' if k in eligible else ''}" for k in range(width)
    )
    assert _verdict(
        7,
        "band decay at peak",
        ok,
        f"means [{bands}] (* = >=100 samples, {eligible.size} bands judged) "
        f"elapsed={elapsed:.1f}s",
    )


def test_criterion_8_determinism_and_step_speed(tmp_path):
    # byte-identical outputs at 1 and 8 workers, and one engine step at
    # n=1e6 in under a second
    t0 = time.perf_counter()
    base = dataclasses.replace(preset_emerging(10_000), seed=8108, replications=8)
    dirs = {w: tmp_path / f"w{w}" for w in (1, 8)}
    for w, d in dirs.items():
        run_replications(dataclasses.replace(base, out_dir=str(d)), workers=w)
    identical = True
    names = sorted(p.name for p in dirs[1].iterdir())
    identical = names == sorted(p.name for p in dirs[8].iterdir())
    for name in names:
        a = (dirs[1] / name).read_bytes()
        b = (dirs[8] / name).read_bytes()
        if name == "manifest.json":
            da, db = json.loads(a), json.loads(b)
            for d in (da, db):
                d.pop("started_at")
                d.pop("wall_seconds")
                d["config_text"] = "\n".join(
                    ln
                    for ln in d["config_text"].splitlines()
                    if not ln.startswith("out_dir=")
                )
            identical = identical and da == db
        else:
            identical = identical and a == b

    params = EpidemicParams(
        n=1_000_000, alpha=2.8, kappa=1.0, tau=3, initial_infected=14, max_steps=10
    )
    streams = ReplicateStreams.from_seed(8108, 0)
    grid = build_grid(params, streams.grid)
    state = init_population(params, streams.init)
    step(state, grid, params, streams)  # warmup
    t_step = time.perf_counter()
    step(state, grid, params, streams)
    step_seconds = time.perf_counter() - t_step
    elapsed = time.perf_counter() - t0
    ok = identical and step_seconds < 1.0
    assert _verdict(
        8,
        "determinism and speed",
        ok,
        f"workers 1 vs 8 identical={identical} "
        f"step(n=1e6)={step_seconds * 1000:.0f}ms elapsed={elapsed:.1f}s",
    )
