"""Scenario runners turning the model's guarantees into measurements.

Provides the standard arena scaling (``L = sqrt(n)`` with the radius set
relative to its admissibility threshold), the flooding-time budget with its
precondition, replica-seeded scaling experiments against that budget, the
corner-event lower-bound construction, batch lemma sweeps (zone structure,
core density, turn counts), and stationarity validation by pooled
histograms.

All replica and trial seeds derive deterministically from the experiment
seed, so every report is a pure function of its configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .core import (
    INIT_STREAM_INDEX,
    MONITOR_STREAM_INDEX,
    SPEED_ENVELOPE_DEFAULT,
    WorldParams,
    derive_substream,
)
from .flooding import (
    DEFAULT_BOUND_CONSTANTS,
    SOURCE_IN_CZ,
    SOURCE_IN_SUBURB,
    SOURCE_RANDOM,
    RunRecord,
    SourcePlacementError,
    density_monitor,
    flood_time_budget,
    run_flood,
)
from .mobility import (
    APPROX_STATIONARY,
    WARMUP,
    TrajectoryRecorder,
    count_turns,
    init_population,
    position_histogram,
)
from .stationary import grid_cell_masses, sample_stationary_positions
from .zones import (
    ZoneMap,
    build_zone_map,
    check_expansion,
    check_suburb_diameter,
    cz_row_column_counts,
)


def derived_seed(*entropy: int) -> int:
    """Deterministic 64-bit seed from an integer tuple."""
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def make_params(
    n: int,
    c1: float = 2.5,
    radius_multiplier: float = 1.0,
    R: float | None = None,
    v: float | None = None,
    eta: float = 0.0,
    seed: int = 0,
) -> WorldParams:
    """Scenario parameters at the standard arena scaling ``L = sqrt(n)``.

    The radius defaults to ``radius_multiplier`` times the admissibility
    threshold ``c1 L sqrt(ln(n)/n)`` and the speed to its cap ``R / c2``.
    """
    L = math.sqrt(n)
    if R is None:
        R = radius_multiplier * c1 * L * math.sqrt(math.log(n) / n)
    if v is None:
        v = R / SPEED_ENVELOPE_DEFAULT
    return WorldParams(n=n, L=L, R=R, v=v, seed=seed, c1=c1, eta=eta)


def theoretical_bound(
    params: WorldParams,
    zone_map: ZoneMap | None = None,
    constants: tuple[float, float] = DEFAULT_BOUND_CONSTANTS,
) -> float:
    """Flooding-time budget ``a L / R + b S / v`` (suburb term dropped when
    the suburb is empty).  Rejects immobile agents with a nonempty suburb,
    for whom flooding need not terminate at all."""
    if zone_map is None:
        zone_map = build_zone_map(params)
    budget = flood_time_budget(params, zone_map, constants)
    if not math.isfinite(budget):
        raise ValueError(
            "time budget undefined: immobile agents with a nonempty suburb"
        )
    return budget


def bin_masses(L: float, bins: int) -> np.ndarray:
    """Exact stationary probability mass of every cell of a uniform
    ``bins x bins`` grid over the arena."""
    return grid_cell_masses(L, bins)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(p - q).sum())


# ---------------------------------------------------------------------------
# default sweep
# ---------------------------------------------------------------------------

def default_sweep(seed: int = 0) -> list[WorldParams]:
    """The standard 20-point sweep: twelve settings at 1x/2x the radius
    threshold spanning arena sizes (suburb-rich at 1x, suburb-free at 2x),
    plus eight dense settings whose cells hold enough agents for the core
    density condition to bite (``eta = 0.02``)."""
    sparse = [
        (1000, 2.5, 1.0),
        (2000, 2.5, 1.0),
        (3000, 2.5, 1.0),
        (4000, 2.5, 1.0),
        (5000, 2.2, 1.0),
        (8000, 2.3, 1.0),
        (10000, 2.5, 1.0),
        (10000, 2.0, 1.0),
        (1000, 2.5, 2.0),
        (2000, 2.5, 2.0),
        (4000, 2.5, 2.0),
        (10000, 2.5, 2.0),
    ]
    dense = [
        (1000, 36.0, 13.0),
        (2000, 35.0, 12.0),
        (4000, 48.0, 16.0),
        (5000, 53.0, 18.0),
        (8000, 50.0, 16.0),
        (10000, 56.0, 18.0),
        (2000, 52.0, 18.0),
        (10000, 75.0, 24.0),
    ]
    settings = [
        make_params(n, c1=c1, radius_multiplier=mult, eta=0.0, seed=seed)
        for n, c1, mult in sparse
    ]
    settings.extend(
        make_params(n, c1=c1, R=R, eta=0.02, seed=seed) for n, R, c1 in dense
    )
    return settings


# ---------------------------------------------------------------------------
# turn-count statistics
# ---------------------------------------------------------------------------

@dataclass
class TurnReport:
    """Empirical turn counts over random agent windows vs the logarithmic
    bound ``4 ln(n) / ln(L / (v tau))``."""

    params: WorldParams
    windows: int
    violations: int
    tau_min: int
    tau_max: int
    horizon: int
    max_turns: int
    max_ratio: float  # worst turns / bound

    @property
    def fraction(self) -> float:
        return self.violations / self.windows if self.windows else 0.0

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "windows": self.windows,
            "violations": self.violations,
            "fraction": self.fraction,
            "tau_min": self.tau_min,
            "tau_max": self.tau_max,
            "horizon": self.horizon,
            "max_turns": self.max_turns,
            "max_ratio": self.max_ratio,
        }


def turn_bound(params: WorldParams, tau: int) -> float:
    """``4 ln(n) / ln(L / (v tau))``, valid while ``v tau < L``."""
    ratio = params.L / (params.v * tau)
    if ratio <= 1.0:
        raise ValueError("window so long the bound's logarithm degenerates")
    return 4.0 * math.log(params.n) / math.log(ratio)


def admissible_tau_range(params: WorldParams) -> tuple[int, int]:
    """Integer window lengths in ``[L/(n v), L/(4 v)]``."""
    if params.v == 0.0:
        raise ValueError("turn windows need moving agents")
    tau_min = max(1, math.ceil(params.L / (params.n * params.v)))
    tau_max = math.floor(params.L / (4.0 * params.v))
    if tau_max < tau_min:
        raise ValueError("speed too high for any admissible window length")
    return tau_min, tau_max


def turn_statistics(
    params: WorldParams,
    windows: int = 10_000,
    agents: int = 50,
    seed: int | None = None,
    workers: int = 1,
) -> TurnReport:
    """Record trajectories of a stationary population and measure the turn
    count of ``windows`` random (agent, start, length) windows against the
    logarithmic bound."""
    if seed is None:
        seed = params.seed
    tau_min, tau_max = admissible_tau_range(params)
    horizon = 4 * tau_max
    watched = min(agents, params.n)
    population = init_population(params, APPROX_STATIONARY, workers=workers)
    recorder = TrajectoryRecorder(range(watched))
    recorder.mark_start(population)
    for _ in range(horizon):
        population.step(recorder=recorder, workers=workers)
    trajectories = [
        recorder.trajectory(a, params.v, params.L) for a in range(watched)
    ]
    rng = derive_substream(seed, MONITOR_STREAM_INDEX)
    violations = 0
    max_turns = 0
    max_ratio = 0.0
    for _ in range(windows):
        a = int(rng.integers(watched))
        tau = int(rng.integers(tau_min, tau_max + 1))
        t = int(rng.integers(0, horizon - tau + 1))
        stats = count_turns(trajectories[a], t, tau, agent=a)
        bound = turn_bound(params, tau)
        ratio = stats.turns / bound
        max_turns = max(max_turns, stats.turns)
        max_ratio = max(max_ratio, ratio)
        if stats.turns > bound:
            violations += 1
    return TurnReport(
        params=params,
        windows=windows,
        violations=violations,
        tau_min=tau_min,
        tau_max=tau_max,
        horizon=horizon,
        max_turns=max_turns,
        max_ratio=max_ratio,
    )


# ---------------------------------------------------------------------------
# lemma sweep
# ---------------------------------------------------------------------------

@dataclass
class SettingReport:
    """All checker outcomes for one sweep setting."""

    name: str
    params: WorldParams
    m: int
    cz_size: int
    suburb_size: int
    coverage_ok: bool
    coverage_rows: int
    coverage_columns: int
    expansion_checked: int
    expansion_violations: int
    suburb_violations: int
    suburb_worst: float
    suburb_allowance: float
    density_checked: bool
    density_violations: int
    turn_windows: int
    turn_violations: int

    @property
    def deterministic_violations(self) -> int:
        return (
            (0 if self.coverage_ok else 1)
            + self.expansion_violations
            + self.suburb_violations
        )


@dataclass
class LemmaSweepReport:
    """Aggregated checker outcomes across all sweep settings."""

    settings: list[SettingReport]
    eta_override: float | None
    suburb_scale: float
    seed: int

    @property
    def deterministic_violations(self) -> int:
        return sum(s.deterministic_violations for s in self.settings)

    @property
    def density_violations(self) -> int:
        return sum(s.density_violations for s in self.settings)

    @property
    def turn_windows(self) -> int:
        return sum(s.turn_windows for s in self.settings)

    @property
    def turn_violations(self) -> int:
        return sum(s.turn_violations for s in self.settings)

    @property
    def turn_fraction(self) -> float:
        w = self.turn_windows
        return self.turn_violations / w if w else 0.0

    @property
    def ok(self) -> bool:
        return (
            self.deterministic_violations == 0
            and self.density_violations == 0
            and self.turn_fraction <= 0.01
        )

    def to_json_dict(self) -> dict:
        return {
            "eta_override": self.eta_override,
            "suburb_scale": self.suburb_scale,
            "seed": self.seed,
            "deterministic_violations": self.deterministic_violations,
            "density_violations": self.density_violations,
            "turn_windows": self.turn_windows,
            "turn_violations": self.turn_violations,
            "turn_fraction": self.turn_fraction,
            "ok": self.ok,
            "settings": [
                {
                    "name": s.name,
                    "params": s.params.to_dict(),
                    "m": s.m,
                    "cz_size": s.cz_size,
                    "suburb_size": s.suburb_size,
                    "coverage_ok": s.coverage_ok,
                    "coverage_rows": s.coverage_rows,
                    "coverage_columns": s.coverage_columns,
                    "expansion_checked": s.expansion_checked,
                    "expansion_violations": s.expansion_violations,
                    "suburb_violations": s.suburb_violations,
                    "suburb_worst": s.suburb_worst,
                    "suburb_allowance": s.suburb_allowance,
                    "density_checked": s.density_checked,
                    "density_violations": s.density_violations,
                    "turn_windows": s.turn_windows,
                    "turn_violations": s.turn_violations,
                }
                for s in self.settings
            ],
        }


def lemma_sweep(
    settings: Sequence[WorldParams] | None = None,
    eta_override: float | None = None,
    suburb_scale: float = 1.0,
    expansion_samples: int = 2000,
    density_horizon: int = 300,
    turn_windows: int = 200,
    include_expansion: bool = True,
    include_density: bool = True,
    include_turns: bool = True,
    seed: int = 0,
    workers: int = 1,
) -> LemmaSweepReport:
    """Run every structural checker across a parameter sweep.

    Deterministic zone checks (row/column coverage, boundary expansion,
    suburb diameter) always run per setting; the core-density monitor runs
    over ``density_horizon`` steps for settings whose effective ``eta`` is
    positive, and turn-count windows are sampled per setting.
    ``eta_override`` and ``suburb_scale`` exist for negative controls
    (``eta_override=10`` or ``suburb_scale=1/20`` must produce violations).
    """
    if settings is None:
        settings = default_sweep(seed=seed)
    reports: list[SettingReport] = []
    for k, params in enumerate(settings):
        zone_map = build_zone_map(params)
        coverage = cz_row_column_counts(zone_map)
        if include_expansion:
            expansion = check_expansion(
                zone_map,
                mode="auto",
                samples=expansion_samples,
                rng=derive_substream(seed, MONITOR_STREAM_INDEX + 16 + k),
            )
            expansion_checked = expansion.subsets_checked
            expansion_violations = expansion.violations
        else:
            expansion_checked = expansion_violations = 0
        suburb = check_suburb_diameter(zone_map, scale=suburb_scale)
        eta_eff = params.eta if eta_override is None else eta_override
        density_checked = include_density and eta_eff > 0.0
        density_violations = 0
        if density_checked:
            population = init_population(params, APPROX_STATIONARY, workers=workers)
            density_violations = density_monitor(
                population, zone_map, eta_eff, density_horizon, workers=workers
            )
        turn_count = turn_violation_count = 0
        if include_turns and params.v > 0.0 and turn_windows > 0:
            turns = turn_statistics(
                params,
                windows=turn_windows,
                seed=derived_seed(seed, 1, k),
                workers=workers,
            )
            turn_count = turns.windows
            turn_violation_count = turns.violations
        reports.append(
            SettingReport(
                name=f"n={params.n} R={params.R:.4g} c1={params.c1:.4g}",
                params=params,
                m=zone_map.m,
                cz_size=zone_map.cz_size,
                suburb_size=zone_map.m**2 - zone_map.cz_size,
                coverage_ok=coverage.ok,
                coverage_rows=coverage.rows_with_central,
                coverage_columns=coverage.columns_with_central,
                expansion_checked=expansion_checked,
                expansion_violations=expansion_violations,
                suburb_violations=suburb.violations,
                suburb_worst=suburb.worst_distance,
                suburb_allowance=suburb.allowance,
                density_checked=density_checked,
                density_violations=density_violations,
                turn_windows=turn_count,
                turn_violations=turn_violation_count,
            )
        )
    return LemmaSweepReport(
        settings=reports,
        eta_override=eta_override,
        suburb_scale=suburb_scale,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# scaling experiment
# ---------------------------------------------------------------------------

@dataclass
class ScalingReport:
    """Flooding times across arena scales against the time budget."""

    scales: tuple[int, ...]
    replicas: int
    c1: float
    constants: tuple[float, float]
    source_rules: tuple[str, ...]
    init_mode: str
    seed: int
    runs: list[RunRecord]
    rows: list[dict]
    max_ratio: float  # C: worst median-time / budget over (scale, rule)
    slopes: dict[str, float]  # per rule: d log(ratio) / d log(n)
    spread_constant: float  # worst cz_spread_time / (L/R) over in_cz runs

    def to_json_dict(self) -> dict:
        return {
            "scales": list(self.scales),
            "replicas": self.replicas,
            "c1": self.c1,
            "constants": list(self.constants),
            "source_rules": list(self.source_rules),
            "init_mode": self.init_mode,
            "seed": self.seed,
            "rows": self.rows,
            "max_ratio": self.max_ratio,
            "slopes": self.slopes,
            "spread_constant": self.spread_constant,
        }


def scaling_experiment(
    scales: Sequence[int] = (1000, 2000, 4000),
    replicas: int = 20,
    c1: float = 2.5,
    constants: tuple[float, float] = DEFAULT_BOUND_CONSTANTS,
    source_rules: Sequence[str] = (SOURCE_IN_CZ, SOURCE_IN_SUBURB),
    init_mode: str = APPROX_STATIONARY,
    seed: int = 0,
    workers: int = 1,
    collect_progress: bool = False,
) -> ScalingReport:
    """Seeded flooding runs across arena scales.

    Each scale uses ``L = sqrt(n)`` with the radius at its admissibility
    threshold and the speed at its cap.  Every (scale, replica, rule) gets
    its own derived seed; a zone-placement failure (no agent in the
    requested zone) retries with a fresh derived seed.
    """
    runs: list[RunRecord] = []
    rows: list[dict] = []
    max_ratio = 0.0
    spread_constant = 0.0
    ratio_by_rule: dict[str, list[tuple[int, float]]] = {
        rule: [] for rule in source_rules
    }
    for si, n in enumerate(scales):
        base = make_params(n, c1=c1, eta=0.0)
        zone_map = build_zone_map(base)
        budget = theoretical_bound(base, zone_map, constants)
        for ri, rule in enumerate(source_rules):
            times: list[int] = []
            spreads: list[int] = []
            for r in range(replicas):
                for attempt in range(100):
                    params = replace(
                        base, seed=derived_seed(seed, si, r, ri, attempt)
                    )
                    try:
                        record = run_flood(
                            params,
                            source_rule=rule,
                            init_mode=init_mode,
                            zone_map=zone_map,
                            bound_constants=constants,
                            workers=workers,
                            collect_progress=collect_progress,
                        )
                        break
                    except SourcePlacementError:
                        continue
                else:
                    raise RuntimeError(
                        f"could not place a source with rule {rule!r} at n={n}"
                    )
                runs.append(record)
                if record.timed_out:
                    raise RuntimeError(
                        f"flood timed out at n={n}, rule={rule}, replica={r} "
                        f"(max_steps={record.max_steps})"
                    )
                times.append(record.flooding_time)
                if record.cz_spread_time is not None:
                    spreads.append(record.cz_spread_time)
                    if rule == SOURCE_IN_CZ:
                        spread_constant = max(
                            spread_constant,
                            record.cz_spread_time / (base.L / base.R),
                        )
            median_time = float(np.median(times))
            ratio = median_time / budget
            max_ratio = max(max_ratio, ratio)
            ratio_by_rule[rule].append((n, ratio))
            rows.append(
                {
                    "n": n,
                    "L": base.L,
                    "R": base.R,
                    "v": base.v,
                    "rule": rule,
                    "replicas": replicas,
                    "median_time": median_time,
                    "min_time": int(min(times)),
                    "max_time": int(max(times)),
                    "median_spread": float(np.median(spreads)) if spreads else None,
                    "bound": budget,
                    "ratio": ratio,
                }
            )
    slopes: dict[str, float] = {}
    for rule, points in ratio_by_rule.items():
        if len(points) >= 2:
            xs = np.log([p[0] for p in points])
            ys = np.log([p[1] for p in points])
            slopes[rule] = float(np.polyfit(xs, ys, 1)[0])
        else:
            slopes[rule] = 0.0
    return ScalingReport(
        scales=tuple(scales),
        replicas=replicas,
        c1=c1,
        constants=tuple(constants),
        source_rules=tuple(source_rules),
        init_mode=init_mode,
        seed=seed,
        runs=runs,
        rows=rows,
        max_ratio=max_ratio,
        slopes=slopes,
        spread_constant=spread_constant,
    )


# ---------------------------------------------------------------------------
# lower-bound construction
# ---------------------------------------------------------------------------

@dataclass
class LowerBoundReport:
    """Corner-event statistics and conditional flooding times.

    The event of interest puts at least one agent in the corner square
    ``F = [0, d]^2`` while the surrounding annulus ``E - F`` (with
    ``E = [0, 3d]^2``) is empty, so the corner agent starts isolated and
    information must physically travel to it.
    """

    params: WorldParams
    d: float
    trials: int
    hits: int  # trials where the corner event held
    f_occupied: int  # trials with >= 1 agent in F
    annulus_empty: int  # trials with no agent in E - F
    floods: int  # conditional floods run (event held, source outside F)
    threshold: float  # (2d - R) / (2v)
    conditional_times: list[int]  # censored at max_steps
    conditional_satisfied: int  # floods with T >= threshold
    max_steps: int

    @property
    def probability(self) -> float:
        return self.hits / self.trials if self.trials else 0.0

    @property
    def all_satisfied(self) -> bool:
        return self.conditional_satisfied == self.floods

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "d": self.d,
            "trials": self.trials,
            "hits": self.hits,
            "probability": self.probability,
            "f_occupied": self.f_occupied,
            "annulus_empty": self.annulus_empty,
            "floods": self.floods,
            "threshold": self.threshold,
            "conditional_times": self.conditional_times,
            "conditional_satisfied": self.conditional_satisfied,
            "all_satisfied": self.all_satisfied,
            "max_steps": self.max_steps,
        }


def lower_bound_params(
    n: int = 2000, d_factor: float = 0.23, seed: int = 0
) -> tuple[WorldParams, float]:
    """Standard lower-bound scenario: ``d = d_factor * L / n^(1/3)`` with
    the radius just inside ``d`` (``R = 0.9 d``) and the speed at its cap.

    ``d_factor`` trades the corner square's size against the emptiness of
    its surrounding annulus so the corner event keeps a workable
    probability at finite ``n``.
    """
    L = math.sqrt(n)
    d = d_factor * L / n ** (1.0 / 3.0)
    R = 0.9 * d
    v = R / SPEED_ENVELOPE_DEFAULT
    return WorldParams(n=n, L=L, R=R, v=v, seed=seed, c1=2.5, eta=0.0), d


def lower_bound_experiment(
    params: WorldParams,
    d: float,
    trials: int = 10_000,
    seed: int | None = None,
    max_flood_factor: float = 4.0,
    flood_cap: int | None = None,
    workers: int = 1,
) -> LowerBoundReport:
    """Estimate the corner-event probability and verify the travel-time
    floor on conditional floods.

    Each trial draws a fresh stationary population (via the same seeded
    stream the flood initialiser uses, so the tested positions are exactly
    the flood's starting positions).  When the event holds and the randomly
    chosen source is outside ``F``, the flood runs with a step cap of
    ``max_flood_factor`` times the floor ``(2d - R)/(2v)``; hitting the cap
    counts as satisfying the floor (the time is censored, not unknown).
    """
    if params.R > d:
        raise ValueError("the corner construction needs R <= d")
    if 3.0 * d > params.L:
        raise ValueError("the corner squares must fit inside the arena")
    if params.v <= 0.0:
        raise ValueError("the travel-time floor needs moving agents")
    if seed is None:
        seed = params.seed
    threshold = (2.0 * d - params.R) / (2.0 * params.v)
    max_steps = math.ceil(max_flood_factor * threshold) + 1
    hits = f_occupied = annulus_empty = floods = satisfied = 0
    conditional_times: list[int] = []
    for k in range(trials):
        trial_seed = derived_seed(seed, 2, k)
        init_rng = derive_substream(trial_seed, INIT_STREAM_INDEX)
        pos = sample_stationary_positions(init_rng, params.n, params.L)
        in_f = (pos[:, 0] <= d) & (pos[:, 1] <= d)
        in_e = (pos[:, 0] <= 3.0 * d) & (pos[:, 1] <= 3.0 * d)
        some_f = bool(in_f.any())
        empty_annulus = not bool((in_e & ~in_f).any())
        f_occupied += some_f
        annulus_empty += empty_annulus
        hit = some_f and empty_annulus
        if not hit:
            continue
        hits += 1
        if flood_cap is not None and floods >= flood_cap:
            continue
        record = run_flood(
            replace(params, seed=trial_seed),
            source_rule=SOURCE_RANDOM,
            init_mode=APPROX_STATIONARY,
            max_steps=max_steps,
            workers=workers,
        )
        source_pos = pos[record.source_agent]
        if source_pos[0] <= d and source_pos[1] <= d:
            continue  # source inside F: the floor argument does not apply
        floods += 1
        t = record.flooding_time if not record.timed_out else max_steps
        conditional_times.append(t)
        if t >= threshold:
            satisfied += 1
    return LowerBoundReport(
        params=params,
        d=d,
        trials=trials,
        hits=hits,
        f_occupied=f_occupied,
        annulus_empty=annulus_empty,
        floods=floods,
        threshold=threshold,
        conditional_times=conditional_times,
        conditional_satisfied=satisfied,
        max_steps=max_steps,
    )


# ---------------------------------------------------------------------------
# stationarity validation
# ---------------------------------------------------------------------------

@dataclass
class StationarityReport:
    """Total-variation distances of pooled position histograms.

    ``tv_model`` compares the warmed-up population's pooled histogram to the
    exact per-bin masses; ``tv_init`` compares the approximate
    initialiser's pooled histogram to the warmed-up one.
    """

    params: WorldParams
    bins: int
    snapshots: int
    spacing: int
    warmup_steps: int
    tv_model: float
    tv_init: float | None
    histogram_warmup: np.ndarray = field(repr=False)
    histogram_approx: np.ndarray | None = field(repr=False)

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "bins": self.bins,
            "snapshots": self.snapshots,
            "spacing": self.spacing,
            "warmup_steps": self.warmup_steps,
            "tv_model": self.tv_model,
            "tv_init": self.tv_init,
        }


def stationarity_report(
    params: WorldParams | None = None,
    bins: int = 20,
    snapshots: int = 200,
    spacing: int | None = None,
    warmup_steps: int | None = None,
    compare_approx: bool = True,
    workers: int = 1,
) -> StationarityReport:
    """Pool position histograms of a warmed-up population (and optionally of
    the approximate initialiser) and measure total-variation distances."""
    if params is None:
        params = make_params(2000)
    if params.v <= 0.0:
        raise ValueError("stationarity validation needs moving agents")
    if warmup_steps is None:
        warmup_steps = math.ceil(10.0 * params.L / params.v)
    if spacing is None:
        spacing = math.ceil(params.L / params.v)
    reference = bin_masses(params.L, bins)
    population = init_population(params, WARMUP, warmup_steps, workers=workers)
    hist_warm = position_histogram(
        population, bins, snapshots, spacing, workers=workers
    )
    tv_model = total_variation(hist_warm, reference)
    hist_approx = None
    tv_init = None
    if compare_approx:
        population = init_population(params, APPROX_STATIONARY, workers=workers)
        hist_approx = position_histogram(
            population, bins, snapshots, spacing, workers=workers
        )
        tv_init = total_variation(hist_approx, hist_warm)
    return StationarityReport(
        params=params,
        bins=bins,
        snapshots=snapshots,
        spacing=spacing,
        warmup_steps=warmup_steps,
        tv_model=tv_model,
        tv_init=tv_init,
        histogram_warmup=hist_warm,
        histogram_approx=hist_approx,
    )
