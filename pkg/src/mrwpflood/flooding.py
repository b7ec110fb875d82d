"""Synchronous flooding over the moving population.

At time zero only the source is informed and nothing is exchanged.  Each
subsequent step the population moves first, then every informed agent
simultaneously informs all agents within the communication radius (closed
ball, measured on the post-move snapshot).  Flooding time is the first step
at which everyone is informed.

Neighbour queries use a uniform bucket grid with bucket side equal to the
communication radius, so a query scans at most the 3x3 block of buckets
around the query point.  The grid only prunes; answers are exact.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    RNG_ALGORITHM_ID,
    SOURCE_STREAM_INDEX,
    AssumptionReport,
    WorldParams,
    check_assumptions,
    derive_substream,
)
from .mobility import APPROX_STATIONARY, Population, init_population
from .zones import CellSet, ZoneMap, build_zone_map

DEFAULT_BOUND_CONSTANTS = (18.0, 600.0)
FALLBACK_MAX_STEPS = 10_000_000

SOURCE_RANDOM = "random"
SOURCE_IN_CZ = "in_cz"
SOURCE_IN_SUBURB = "in_suburb"
SOURCE_FIXED_PREFIX = "agent:"


class NeighborIndex:
    """Uniform bucket grid over agent positions for radius queries.

    Bucket side equals the communication radius ``R``; positions are bucketed
    by truncation with the far edge clipped into the last bucket.  Queries
    must use a radius at most ``R`` so the 3x3 bucket block suffices.
    """

    def __init__(self, positions: np.ndarray, L: float, R: float):
        if positions.ndim != 2 or positions.shape[1] != 2:
            raise ValueError("positions must have shape (n, 2)")
        self.positions = positions
        self.L = L
        self.R = R
        self.nb = max(1, math.ceil(L / R))
        ix = np.minimum((positions[:, 0] / R).astype(np.int64), self.nb - 1)
        iy = np.minimum((positions[:, 1] / R).astype(np.int64), self.nb - 1)
        self.codes = ix * self.nb + iy
        self.order = np.argsort(self.codes, kind="stable")
        self.sorted_codes = self.codes[self.order]

    def _block_codes(self, pts: np.ndarray) -> np.ndarray:
        """(k, 9) bucket codes of the 3x3 blocks around each point;
        out-of-grid offsets get an impossible code."""
        ix = np.minimum((pts[:, 0] / self.R).astype(np.int64), self.nb - 1)
        iy = np.minimum((pts[:, 1] / self.R).astype(np.int64), self.nb - 1)
        offs = np.array([(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)])
        jx = ix[:, None] + offs[:, 0][None, :]
        jy = iy[:, None] + offs[:, 1][None, :]
        valid = (jx >= 0) & (jx < self.nb) & (jy >= 0) & (jy < self.nb)
        codes = jx * self.nb + jy
        codes[~valid] = -1
        return codes

    def _gather(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (query index, candidate agent index) pairs covering the
        3x3 bucket blocks of a batch of query points."""
        codes = self._block_codes(pts)  # (k, 9)
        flat = codes.ravel()
        starts = np.searchsorted(self.sorted_codes, flat, side="left")
        stops = np.searchsorted(self.sorted_codes, flat, side="right")
        counts = stops - starts
        total = int(counts.sum())
        if total == 0:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        # expand the [start, stop) ranges into one long index list
        bases = np.repeat(starts, counts)
        offsets = np.arange(total) - np.repeat(
            np.concatenate(([0], np.cumsum(counts)[:-1])), counts
        )
        cand = self.order[bases + offsets]
        query = np.repeat(np.arange(flat.size), counts) // 9
        return query, cand

    def query(self, point: Sequence[float], radius: float) -> np.ndarray:
        """Indices of all agents within ``radius`` (closed ball) of a point."""
        if radius > self.R:
            raise ValueError("query radius exceeds the bucket side")
        pts = np.asarray(point, dtype=float).reshape(1, 2)
        _, cand = self._gather(pts)
        if cand.size == 0:
            return np.empty(0, dtype=np.int64)
        d = self.positions[cand] - pts[0]
        keep = (d[:, 0] ** 2 + d[:, 1] ** 2) <= radius * radius
        return np.sort(cand[keep])

    def any_within(
        self, pts: np.ndarray, mask: np.ndarray, radius: float
    ) -> np.ndarray:
        """For each query point, whether any agent with ``mask`` true lies
        within ``radius`` of it (closed ball)."""
        if radius > self.R:
            raise ValueError("query radius exceeds the bucket side")
        out = np.zeros(pts.shape[0], dtype=bool)
        if pts.shape[0] == 0:
            return out
        query, cand = self._gather(pts)
        if cand.size == 0:
            return out
        sel = mask[cand]
        if not sel.any():
            return out
        query, cand = query[sel], cand[sel]
        d = self.positions[cand] - pts[query]
        hit = (d[:, 0] ** 2 + d[:, 1] ** 2) <= radius * radius
        out[query[hit]] = True
        return out

    def pairs_within(self, radius: float) -> np.ndarray:
        """All unordered index pairs (i < j) at distance <= radius."""
        if radius > self.R:
            raise ValueError("query radius exceeds the bucket side")
        query, cand = self._gather(self.positions)
        keep = cand > query
        query, cand = query[keep], cand[keep]
        if query.size == 0:
            return np.empty((0, 2), dtype=np.int64)
        d = self.positions[cand] - self.positions[query]
        hit = (d[:, 0] ** 2 + d[:, 1] ** 2) <= radius * radius
        pairs = np.stack([query[hit], cand[hit]], axis=1)
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        return pairs[order]


def brute_force_within(
    positions: np.ndarray, point: Sequence[float], radius: float
) -> np.ndarray:
    """Reference implementation of the closed-ball query."""
    d = positions - np.asarray(point, dtype=float)
    return np.flatnonzero(d[:, 0] ** 2 + d[:, 1] ** 2 <= radius * radius)


def brute_force_pairs(positions: np.ndarray, radius: float) -> np.ndarray:
    """Reference all-pairs query: unordered pairs (i < j) with distance at
    most ``radius``, in the same lexicographic order as ``pairs_within``."""
    diff = positions[:, None, :] - positions[None, :, :]
    close = (diff**2).sum(axis=2) <= radius * radius
    i, j = np.nonzero(np.triu(close, k=1))
    return np.stack([i, j], axis=1)


def detect_meetings(positions: np.ndarray, L: float, R: float) -> np.ndarray:
    """Pairs of agents close enough that one protocol step of motion cannot
    break the link: distance at most ``(3/4) R``."""
    index = NeighborIndex(positions, L, R)
    return index.pairs_within(0.75 * R)


# ---------------------------------------------------------------------------
# flood state and stepping
# ---------------------------------------------------------------------------

@dataclass
class FloodState:
    """Mutable per-run flooding state.

    ``informed_cells`` holds the most recently computed set of central cells
    whose every occupant is informed (empty cells count as informed).
    """

    informed: np.ndarray  # bool per agent
    step: int
    source: int
    informed_cells: CellSet | None = None

    @property
    def informed_count(self) -> int:
        return int(self.informed.sum())

    @property
    def all_informed(self) -> bool:
        return bool(self.informed.all())


def flood_step(population: Population, state: FloodState, workers: int = 1) -> None:
    """One protocol step: move everyone, then synchronously inform every
    uninformed agent within the radius of an informed one."""
    population.step(workers=workers)
    state.step += 1
    if state.all_informed:
        return
    p = population.params
    index = NeighborIndex(population.pos, p.L, p.R)
    targets = np.flatnonzero(~state.informed)
    hit = index.any_within(population.pos[targets], state.informed, p.R)
    state.informed[targets[hit]] = True


def _cell_codes(positions: np.ndarray, zone_map: ZoneMap) -> np.ndarray:
    m, ell = zone_map.m, zone_map.ell
    ix = np.minimum((positions[:, 0] / ell).astype(np.int64), m - 1)
    iy = np.minimum((positions[:, 1] / ell).astype(np.int64), m - 1)
    return ix * m + iy


def informed_cells(
    population: Population, state: FloodState, zone_map: ZoneMap
) -> tuple[CellSet, int]:
    """(central cells whose occupants are all informed — empty cells count,
    number of suburb agents currently informed)."""
    m = zone_map.m
    codes = _cell_codes(population.pos, zone_map)
    blocked = np.zeros(m * m, dtype=bool)
    blocked[codes[~state.informed]] = True
    central_flat = zone_map.central.reshape(-1)
    done = np.flatnonzero(central_flat & ~blocked)
    cells = frozenset((int(c // m), int(c % m)) for c in done)
    suburb_informed = int((~central_flat[codes] & state.informed).sum())
    return cells, suburb_informed


# ---------------------------------------------------------------------------
# density monitor
# ---------------------------------------------------------------------------

@dataclass
class DensityMonitor:
    """Counts core-occupancy violations: (step, cell) pairs where a central
    cell's middle-ninth core holds fewer than ``eta * ln(n)`` agents."""

    zone_map: ZoneMap
    eta: float
    n: int
    checks: int = 0
    violations: int = 0
    worst_count: int | None = None

    @property
    def floor(self) -> float:
        return self.eta * math.log(self.n)

    def observe(self, positions: np.ndarray) -> int:
        """Count agents in every central core; returns this step's number
        of violating cells and accumulates the totals."""
        z = self.zone_map
        scaled = positions / z.ell
        cell = np.minimum(scaled.astype(np.int64), z.m - 1)
        frac = scaled - cell
        in_core = (
            (frac[:, 0] >= 1.0 / 3.0)
            & (frac[:, 0] < 2.0 / 3.0)
            & (frac[:, 1] >= 1.0 / 3.0)
            & (frac[:, 1] < 2.0 / 3.0)
        )
        codes = cell[:, 0] * z.m + cell[:, 1]
        counts = np.bincount(codes[in_core], minlength=z.m * z.m)
        core_counts = counts[z.central.reshape(-1)]
        low = int(core_counts.min()) if core_counts.size else 0
        if self.worst_count is None or low < self.worst_count:
            self.worst_count = low
        self.checks += 1
        bad = int((core_counts < self.floor).sum())
        self.violations += bad
        return bad


def density_monitor(
    population: Population,
    zone_map: ZoneMap,
    eta: float,
    horizon: int,
    workers: int = 1,
) -> int:
    """Step an (already stationary) population ``horizon`` times and count
    the (step, cell) pairs where a central core held fewer than
    ``eta * ln(n)`` agents."""
    monitor = DensityMonitor(zone_map, eta, population.params.n)
    for _ in range(horizon):
        population.step(workers=workers)
        monitor.observe(population.pos)
    return monitor.violations


# ---------------------------------------------------------------------------
# run records
# ---------------------------------------------------------------------------

@dataclass
class RunRecord:
    """Everything observed in one flooding run, JSON-serialisable."""

    params: WorldParams
    init_mode: str
    warmup_steps: int | None
    source_rule: str
    source_agent: int
    flooding_time: int | None
    timed_out: bool
    cz_spread_time: int | None
    theoretical_bound: float
    bound_constants: tuple[float, float]
    assumptions: AssumptionReport
    max_steps: int
    violations: dict[str, int]
    progress: list[tuple[int, int, int, int]]  # (step, informed, cz cells, suburb)
    wall_time: float = 0.0

    def to_json_dict(self) -> dict:
        bound = self.theoretical_bound
        return {
            "params": self.params.to_dict(),
            "init_mode": self.init_mode,
            "warmup_steps": self.warmup_steps,
            "source_rule": self.source_rule,
            "source_agent": self.source_agent,
            "flooding_time": self.flooding_time,
            "timed_out": self.timed_out,
            "cz_spread_time": self.cz_spread_time,
            "theoretical_bound": bound if math.isfinite(bound) else None,
            "bound_constants": list(self.bound_constants),
            "assumptions": {
                "radius_ok": self.assumptions.radius_ok,
                "speed_ok": self.assumptions.speed_ok,
                "radius_slack": self.assumptions.radius_slack,
                "speed_slack": self.assumptions.speed_slack,
            },
            "max_steps": self.max_steps,
            "violations": dict(self.violations),
            "progress": [list(row) for row in self.progress],
            "rng_algorithm": RNG_ALGORITHM_ID,
        }


def suburb_reach(zone_map: ZoneMap) -> float:
    """Travel-distance term of the time budget: the reference suburb
    diameter when suburb cells exist, zero when the central zone covers the
    whole grid."""
    return 0.0 if zone_map.suburb_empty else zone_map.suburb_diameter


def flood_time_budget(
    params: WorldParams,
    zone_map: ZoneMap,
    constants: tuple[float, float] = DEFAULT_BOUND_CONSTANTS,
) -> float:
    """``a L / R + b S / v`` with the suburb term dropped when the suburb is
    empty; infinite for immobile agents with a nonempty suburb."""
    a, b = constants
    reach = suburb_reach(zone_map)
    if reach == 0.0:
        return a * params.L / params.R
    if params.v == 0.0:
        return math.inf
    return a * params.L / params.R + b * reach / params.v


def default_max_steps(
    params: WorldParams,
    zone_map: ZoneMap,
    constants: tuple[float, float] = DEFAULT_BOUND_CONSTANTS,
) -> int:
    """Step cap: 100x the theoretical budget when the standing assumptions
    hold and the budget is finite, otherwise a fixed large fallback."""
    if check_assumptions(params).all_ok:
        budget = flood_time_budget(params, zone_map, constants)
        if math.isfinite(budget):
            return max(1, math.ceil(100.0 * budget))
    return FALLBACK_MAX_STEPS


class SourcePlacementError(RuntimeError):
    """Raised when the requested source zone currently holds no agent."""


def choose_source(
    rule: str,
    population: Population,
    zone_map: ZoneMap,
    rng: np.random.Generator,
) -> int:
    """Pick the source agent.

    ``random`` draws any agent; ``in_cz`` / ``in_suburb`` draw uniformly
    among agents currently inside central / suburb cells (raising when the
    requested zone holds no agent); ``agent:<id>`` is explicit.
    """
    n = population.params.n
    if rule == SOURCE_RANDOM:
        return int(rng.integers(n))
    if rule.startswith(SOURCE_FIXED_PREFIX):
        agent = int(rule[len(SOURCE_FIXED_PREFIX):])
        if not 0 <= agent < n:
            raise ValueError(f"source agent {agent} out of range")
        return agent
    codes = _cell_codes(population.pos, zone_map)
    in_central = zone_map.central.reshape(-1)[codes]
    if rule == SOURCE_IN_CZ:
        pool = np.flatnonzero(in_central)
    elif rule == SOURCE_IN_SUBURB:
        pool = np.flatnonzero(~in_central)
    else:
        raise ValueError(f"unknown source rule: {rule!r}")
    if pool.size == 0:
        raise SourcePlacementError(f"no agent available for source rule {rule!r}")
    return int(pool[rng.integers(pool.size)])


def frontier_floor(params: WorldParams, gap: float) -> int:
    """Minimum steps for information to cross a straight-line gap: each
    step the frontier-to-target distance shrinks by at most R + 2v."""
    if gap <= 0:
        return 0
    return math.ceil(gap / (params.R + 2.0 * params.v))


def _cz_neighborhood(cells: CellSet, zone_map: ZoneMap) -> CellSet:
    """The cells plus their central grid neighbours."""
    central = zone_map.central
    m = zone_map.m
    out = set(cells)
    for (i, j) in cells:
        for d in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            a, b = i + d[0], j + d[1]
            if 0 <= a < m and 0 <= b < m and central[a, b]:
                out.add((a, b))
    return frozenset(out)


def run_flood(
    params: WorldParams,
    source_rule: str = SOURCE_RANDOM,
    init_mode: str = APPROX_STATIONARY,
    warmup_steps: int | None = None,
    zone_map: ZoneMap | None = None,
    max_steps: int | None = None,
    bound_constants: tuple[float, float] = DEFAULT_BOUND_CONSTANTS,
    workers: int = 1,
    check_stability: bool = False,
    collect_progress: bool = False,
    population: Population | None = None,
    on_step: Callable[[Population, FloodState], None] | None = None,
) -> RunRecord:
    """Run one complete flood and return its record.

    The population starts in (approximate) stationarity, the source is
    chosen by ``source_rule`` from a dedicated substream, and the protocol
    runs until everyone is informed or ``max_steps`` is hit (``timed_out``).
    ``cz_spread_time`` is the first step at which every central cell is
    fully informed (vacuously for empty cells).

    ``check_stability`` attaches the core-density monitor and additionally
    counts stability violations: whenever the density condition held at a
    step, every fully-informed central cell and its central neighbours must
    be fully informed at the next step.
    """
    t_start = time.perf_counter()
    if zone_map is None:
        zone_map = build_zone_map(params)
    if population is None:
        population = init_population(params, init_mode, warmup_steps, workers)
    source_rng = derive_substream(params.seed, SOURCE_STREAM_INDEX)
    source = choose_source(source_rule, population, zone_map, source_rng)
    if max_steps is None:
        max_steps = default_max_steps(params, zone_map, bound_constants)
    informed = np.zeros(params.n, dtype=bool)
    informed[source] = True
    state = FloodState(informed=informed, step=0, source=source)
    gaps = population.pos - population.pos[source]
    d_far = float(np.sqrt((gaps**2).sum(axis=1)).max())
    monitor = (
        DensityMonitor(zone_map, params.eta, params.n) if check_stability else None
    )
    stability_violations = 0
    progress: list[tuple[int, int, int, int]] = []
    cz_spread_time: int | None = None
    cells, suburb_inf = informed_cells(population, state, zone_map)
    state.informed_cells = cells
    if len(cells) == zone_map.cz_size:
        cz_spread_time = 0
    if collect_progress:
        progress.append((0, state.informed_count, len(cells), suburb_inf))
    prev_guard = False
    if monitor is not None:
        prev_guard = monitor.observe(population.pos) == 0
    prev_cells = cells
    flooding_time: int | None = 0 if state.all_informed else None
    while flooding_time is None and state.step < max_steps:
        flood_step(population, state, workers=workers)
        guard = False
        if monitor is not None:
            guard = monitor.observe(population.pos) == 0
        need_cells = (
            collect_progress or check_stability or cz_spread_time is None
        )
        if need_cells:
            cells, suburb_inf = informed_cells(population, state, zone_map)
            state.informed_cells = cells
            if cz_spread_time is None and len(cells) == zone_map.cz_size:
                cz_spread_time = state.step
            if check_stability and prev_guard:
                required = _cz_neighborhood(prev_cells, zone_map)
                stability_violations += len(required - cells)
            prev_cells = cells
        prev_guard = guard
        if collect_progress:
            progress.append((state.step, state.informed_count, len(cells), suburb_inf))
        if on_step is not None:
            on_step(population, state)
        if state.all_informed:
            flooding_time = state.step
    timed_out = flooding_time is None
    if flooding_time is not None:
        floor = frontier_floor(params, d_far - params.R)
        if flooding_time < floor:
            raise RuntimeError(
                f"flooding time {flooding_time} beats the physical frontier "
                f"floor {floor}; the exchange step is broken"
            )
    violations: dict[str, int] = {}
    if monitor is not None:
        violations["core_occupancy"] = monitor.violations
        violations["stability"] = stability_violations
    return RunRecord(
        params=params,
        init_mode=init_mode,
        warmup_steps=warmup_steps,
        source_rule=source_rule,
        source_agent=source,
        flooding_time=flooding_time,
        timed_out=timed_out,
        cz_spread_time=cz_spread_time,
        theoretical_bound=flood_time_budget(params, zone_map, bound_constants),
        bound_constants=bound_constants,
        assumptions=check_assumptions(params),
        max_steps=max_steps,
        violations=violations,
        progress=progress,
        wall_time=time.perf_counter() - t_start,
    )
