"""Stochastic epidemic simulation on a mobile population.

A population of n nodes relocates every step over round(kappa * n) cells
whose integer attractiveness follows a truncated power law; infection
passes within shared cells, infected nodes retire after tau steps, and
mid-run interventions can swap in a new environment.  Exact small-instance
oracles validate the Monte Carlo engine.
"""

from .attractiveness import (
    CellGrid,
    EpidemicParams,
    attractiveness_cutoff,
    build_grid,
    choose_cell,
    choose_cells,
    power_law_pmf,
)
from .dynamics import (
    INFECTED,
    NEVER_INFECTED,
    RECOVERED,
    UNINFECTED,
    PopulationState,
    StatusCounts,
    StepReport,
    init_population,
    step,
    substep_move,
    substep_recover,
    substep_transmit,
)
from .errors import ConfigError
from .harness import (
    AggregateStats,
    RunManifest,
    RunResult,
    StatSummary,
    aggregate_stats,
    engine_version,
    run_replicate,
    run_replications,
    sorted_quantile,
)
from .metrics import (
    CAP_REACHED,
    CapReached,
    ReplicateSummary,
    SimulationTrace,
    TraceBuilder,
    causality_violations,
    contracting_fraction,
    extinction_time,
    group_index,
    group_indices,
    infectious_lifetimes,
    prevalence_walk,
    survivor_fraction,
    write_summary_csv,
    write_trace_csv,
)
from .oracle import (
    RegimeCheckResult,
    enumerate_step,
    exact_meeting_probability,
    expected_new_infections_bound,
    infection_probability_from_exposures,
    sparse_regime_check,
)
from .rng import ReplicateStreams, derive_seed, substream
from .scenario import (
    InterventionSchedule,
    ParamOverlay,
    PrevalenceReached,
    ScenarioConfig,
    TimeReached,
    Trigger,
    apply_intervention,
    parse_config,
    parse_trigger,
    preset_emerging,
    preset_industrialized,
    serialize_config,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateStats",
    "CAP_REACHED",
    "CapReached",
    "CellGrid",
    "ConfigError",
    "EpidemicParams",
    "INFECTED",
    "InterventionSchedule",
    "NEVER_INFECTED",
    "ParamOverlay",
    "PopulationState",
    "PrevalenceReached",
    "RECOVERED",
    "RegimeCheckResult",
    "ReplicateStreams",
    "ReplicateSummary",
    "RunManifest",
    "RunResult",
    "ScenarioConfig",
    "SimulationTrace",
    "StatSummary",
    "StatusCounts",
    "StepReport",
    "TimeReached",
    "TraceBuilder",
    "Trigger",
    "UNINFECTED",
    "aggregate_stats",
    "apply_intervention",
    "attractiveness_cutoff",
    "build_grid",
    "causality_violations",
    "choose_cell",
    "choose_cells",
    "contracting_fraction",
    "derive_seed",
    "engine_version",
    "enumerate_step",
    "exact_meeting_probability",
    "expected_new_infections_bound",
    "extinction_time",
    "group_index",
    "group_indices",
    "infection_probability_from_exposures",
    "infectious_lifetimes",
    "init_population",
    "parse_config",
    "parse_trigger",
    "power_law_pmf",
    "preset_emerging",
    "preset_industrialized",
    "prevalence_walk",
    "run_replicate",
    "run_replications",
    "serialize_config",
    "sorted_quantile",
    "sparse_regime_check",
    "step",
    "substep_move",
    "substep_recover",
    "substep_transmit",
    "substream",
    "survivor_fraction",
    "write_summary_csv",
    "write_trace_csv",
]
