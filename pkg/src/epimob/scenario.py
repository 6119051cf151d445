"""Scenario presets, intervention scheduling, and config parsing.

An intervention models a population-wide behavior change: when a trigger
condition becomes true the run swaps in new environment parameters, with a
fresh grid drawn under the new attractiveness law.  Node statuses and
infection timestamps carry over untouched; only the world changes.

Config files are line-oriented ``key=value`` text with ``#`` comments.
See parse_config for the accepted keys and the trigger grammar.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .attractiveness import CellGrid, EpidemicParams, build_grid
from .dynamics import PopulationState
from .errors import ConfigError


@dataclass(frozen=True)
class TimeReached:
    """Fires once the run has completed `step` steps."""

    step: int

    def __post_init__(self) -> None:
        if not isinstance(self.step, int) or self.step < 1:
            raise ConfigError("trigger step must be a positive integer")

    def met(self, step: int, infected: int, n: int) -> bool:
        return step >= self.step


@dataclass(frozen=True)
class PrevalenceReached:
    """Fires once at least `fraction` of the population is infected."""

    fraction: float

    def __post_init__(self) -> None:
        if not 0.0 < self.fraction <= 1.0:
            raise ConfigError("trigger prevalence fraction must lie in (0, 1]")

    def met(self, step: int, infected: int, n: int) -> bool:
        return infected >= self.fraction * n


TriggerCondition = Union[TimeReached, PrevalenceReached]

# overlay keys allowed on the right-hand side of a trigger
_OVERLAY_KEYS = ("alpha", "kappa", "tau", "beta")


@dataclass(frozen=True)
class ParamOverlay:
    """Partial parameter replacement applied when a trigger fires.

    Unset fields keep their current value.  Static range checks happen
    here; the full cross-field validation happens at merge time against
    the params then in effect.
    """

    alpha: Optional[float] = None
    kappa: Optional[float] = None
    tau: Optional[int] = None
    beta: Optional[float] = None

    def __post_init__(self) -> None:
        if all(getattr(self, k) is None for k in _OVERLAY_KEYS):
            raise ConfigError("overlay must set at least one of alpha, kappa, tau, beta")
        if self.alpha is not None and not self.alpha > 2:
            raise ConfigError("alpha must exceed 2")
        if self.kappa is not None and not self.kappa > 0:
            raise ConfigError("kappa must be positive")
        if self.tau is not None and (not isinstance(self.tau, int) or self.tau < 1):
            raise ConfigError("tau must be a positive integer")
        if self.beta is not None and not 0.0 <= self.beta <= 1.0:
            raise ConfigError("beta must lie in [0, 1]")

    def merge(self, params: EpidemicParams) -> EpidemicParams:
        """New params with the overlay applied; revalidates every invariant."""
        changes = {k: getattr(self, k) for k in _OVERLAY_KEYS if getattr(self, k) is not None}
        return dataclasses.replace(params, **changes)


@dataclass(frozen=True)
class Trigger:
    condition: TriggerCondition
    overlay: ParamOverlay


@dataclass(frozen=True)
class InterventionSchedule:
    """Ordered triggers; each fires at most once per run.

    Time triggers must come with strictly increasing steps and prevalence
    triggers with strictly increasing fractions, so the schedule reads in
    firing order within each condition kind.
    """

    triggers: tuple = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "triggers", tuple(self.triggers))
        steps = [t.condition.step for t in self.triggers if isinstance(t.condition, TimeReached)]
        fracs = [
            t.condition.fraction
            for t in self.triggers
            if isinstance(t.condition, PrevalenceReached)
        ]
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ConfigError("time triggers must have strictly increasing steps")
        if any(b <= a for a, b in zip(fracs, fracs[1:])):
            raise ConfigError("prevalence triggers must have strictly increasing fractions")

    def __len__(self) -> int:
        return len(self.triggers)

    def __iter__(self):
        return iter(self.triggers)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one invocation needs: params, schedule, seeding, outputs."""

    params: EpidemicParams
    schedule: InterventionSchedule = InterventionSchedule()
    seed: int = 0
    replications: int = 1
    out_dir: Optional[str] = None
    log_cells: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError("replications must be a positive integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an integer in [0, 2**64)")


def preset_emerging(n: int) -> ScenarioConfig:
    """Loose-mixing scenario: heavy-tailed attractiveness, one cell per node.

    alpha=2.8 and kappa=1 concentrate the population in few hot cells; the
    infectious period round(ln ln n) grows barely at all with n, and the
    outbreak is seeded with round(ln n) cases.
    """
    if n < 100:
        raise ConfigError("preset requires n >= 100")
    params = EpidemicParams(
        n=n,
        alpha=2.8,
        kappa=1.0,
        tau=max(1, round(math.log(math.log(n)))),
        beta=1.0,
        initial_infected=max(1, round(math.log(n))),
    )
    return ScenarioConfig(params=params)


def preset_industrialized(n: int) -> ScenarioConfig:
    """Dispersed scenario: flat attractiveness tail and many cells per node.

    alpha=6 and kappa=16 spread the population thin and tau=2 retires cases
    quickly, the combination that keeps outbreaks small and short.  The
    concrete constants are this package's choice and fully overridable.
    """
    if n < 100:
        raise ConfigError("preset requires n >= 100")
    params = EpidemicParams(
        n=n,
        alpha=6.0,
        kappa=16.0,
        tau=2,
        beta=1.0,
        initial_infected=max(1, round(math.log(n))),
    )
    return ScenarioConfig(params=params)


def apply_intervention(
    state: PopulationState,
    grid: CellGrid,
    params: EpidemicParams,
    overlay: ParamOverlay,
    rng: np.random.Generator,
) -> tuple[EpidemicParams, CellGrid]:
    """Swap in overlay parameters and draw a fresh grid under them.

    Statuses and infection timestamps are untouched.  The new tau and beta
    apply from the next step on; nodes already infected longer than a
    shortened tau retire at the next step's recover substep.  The rebuilt
    grid comes from the given stream, so the post-change world is
    independent of the old one.
    """
    if state.status.size != params.n:
        raise ValueError("state and params disagree on population size")
    merged = overlay.merge(params)
    return merged, build_grid(merged, rng)


_INT_KEYS = {"n", "tau", "initial_infected", "max_steps", "seed", "replications"}
_FLOAT_KEYS = {"alpha", "kappa", "beta"}
_TRUE_WORDS = {"true", "1", "yes", "on"}
_FALSE_WORDS = {"false", "0", "no", "off"}

_DEFAULTS = {
    "alpha": 2.8,
    "kappa": 1.0,
    "tau": 1,
    "beta": 1.0,
    "initial_infected": 1,
    "max_steps": 10_000,
    "seed": 0,
    "replications": 1,
    "out_dir": None,
    "log_cells": False,
}

# immediate per-key range checks, so errors carry line numbers
_RANGE_CHECKS = {
    "n": (lambda v: v >= 1, "n must be a positive integer"),
    "alpha": (lambda v: v > 2, "alpha must exceed 2"),
    "kappa": (lambda v: v > 0, "kappa must be positive"),
    "tau": (lambda v: v >= 1, "tau must be a positive integer"),
    "beta": (lambda v: 0.0 <= v <= 1.0, "beta must lie in [0, 1]"),
    "initial_infected": (lambda v: v >= 1, "initial_infected must be at least 1"),
    "max_steps": (lambda v: v >= 1, "max_steps must be a positive integer"),
    "seed": (lambda v: 0 <= v < 2**64, "seed must lie in [0, 2**64)"),
    "replications": (lambda v: v >= 1, "replications must be a positive integer"),
}


def parse_trigger(text: str) -> Trigger:
    """Parse `time:STEP->k=v,...` or `prevalence:FRACTION->k=v,...`."""
    head, arrow, tail = text.partition("->")
    if not arrow:
        raise ConfigError(
            "trigger must look like time:STEP->key=value,... "
            "or prevalence:FRACTION->key=value,..."
        )
    kind, colon, arg = head.strip().partition(":")
    kind = kind.strip()
    if not colon:
        raise ConfigError("trigger condition must look like time:STEP or prevalence:FRACTION")
    if kind == "time":
        try:
            condition: TriggerCondition = TimeReached(int(arg))
        except ValueError as exc:
            raise ConfigError(f"bad trigger step {arg.strip()!r}") from exc
    elif kind == "prevalence":
        try:
            condition = PrevalenceReached(float(arg))
        except ValueError as exc:
            raise ConfigError(f"bad trigger fraction {arg.strip()!r}") from exc
    else:
        raise ConfigError(f"unknown trigger condition {kind!r} (want time or prevalence)")

    fields: dict[str, object] = {}
    for pair in tail.split(","):
        key, eq, value = pair.partition("=")
        key = key.strip()
        value = value.strip()
        if not eq or not key:
            raise ConfigError(f"trigger override {pair.strip()!r} is not key=value")
        if key not in _OVERLAY_KEYS:
            raise ConfigError(f"trigger override key {key!r} not in {_OVERLAY_KEYS}")
        try:
            fields[key] = int(value) if key == "tau" else float(value)
        except ValueError as exc:
            raise ConfigError(f"bad trigger override value {value!r} for {key}") from exc
    return Trigger(condition=condition, overlay=ParamOverlay(**fields))


def _convert(key: str, value: str, lineno: int):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad value {value!r} for {key}") from exc
    if key == "log_cells":
        low = value.lower()
        if low in _TRUE_WORDS:
            return True
        if low in _FALSE_WORDS:
            return False
        raise ConfigError(f"line {lineno}: bad boolean {value!r} for log_cells")
    return value  # out_dir: raw string


def parse_config(text: str) -> ScenarioConfig:
    """Parse line-oriented key=value config text into a validated config.

    Accepted keys: n (required), alpha, kappa, tau, beta, initial_infected,
    max_steps, seed, replications, out_dir, log_cells, and repeatable
    trigger lines `trigger=<time:STEP|prevalence:FRACTION>-><key=value,...>`
    whose override keys are alpha, kappa, tau, beta.  `#` starts a comment;
    blank lines are ignored; a scalar key given twice keeps the last value.
    Unset keys fall back to alpha=2.8, kappa=1, tau=1, beta=1,
    initial_infected=1, max_steps=10000, seed=0, replications=1.
    Malformed input raises ConfigError naming the offending line and key.
    """
    values: dict[str, object] = {}
    triggers: list[Trigger] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not eq or not key:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        if key == "trigger":
            try:
                triggers.append(parse_trigger(value))
            except ConfigError as exc:
                raise ConfigError(f"line {lineno}: {exc}") from None
            continue
        if key not in _DEFAULTS and key != "n":
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        converted = _convert(key, value, lineno)
        if key in _RANGE_CHECKS:
            ok, message = _RANGE_CHECKS[key]
            if not ok(converted):
                raise ConfigError(f"line {lineno}: {message}")
        values[key] = converted

    if "n" not in values:
        raise ConfigError("n is required")

    merged = dict(_DEFAULTS)
    merged.update(values)
    params = EpidemicParams(
        n=merged["n"],
        alpha=merged["alpha"],
        kappa=merged["kappa"],
        tau=merged["tau"],
        beta=merged["beta"],
        initial_infected=merged["initial_infected"],
        max_steps=merged["max_steps"],
    )
    return ScenarioConfig(
        params=params,
        schedule=InterventionSchedule(tuple(triggers)),
        seed=merged["seed"],
        replications=merged["replications"],
        out_dir=merged["out_dir"],
        log_cells=merged["log_cells"],
    )


def serialize_config(config: ScenarioConfig) -> str:
    """Config text that parses back to an equal ScenarioConfig."""
    p = config.params
    lines = [
        f"n={p.n}",
        f"alpha={p.alpha!r}",
        f"kappa={p.kappa!r}",
        f"tau={p.tau}",
        f"beta={p.beta!r}",
        f"initial_infected={p.initial_infected}",
        f"max_steps={p.max_steps}",
        f"seed={config.seed}",
        f"replications={config.replications}",
        f"log_cells={'true' if config.log_cells else 'false'}",
    ]
    if config.out_dir is not None:
        lines.append(f"out_dir={config.out_dir}")
    for trig in config.schedule:
        cond = trig.condition
        head = (
            f"time:{cond.step}"
            if isinstance(cond, TimeReached)
            else f"prevalence:{cond.fraction!r}"
        )
        overrides = ",".join(
            f"{k}={getattr(trig.overlay, k)!r}"
            for k in _OVERLAY_KEYS
            if getattr(trig.overlay, k) is not None
        )
        lines.append(f"trigger={head}->{overrides}")
    return "\n".join(lines) + "\n"
