"""Zone decomposition of the arena into central and suburb cells.

The square is cut into an ``m x m`` grid of cells whose side fits inside
the communication radius (``m = ceil(sqrt(5) L / R)``, so any two points in
the same or adjacent cells are within ``R``).  A cell is *central* when its
stationary occupancy probability reaches ``(3/8) ln(n) / n``; the remaining
*suburb* cells hug the four corners, and cells within Manhattan distance
``2 S`` of a suburb cell form the *extended suburb*.  The module also
provides the combinatorial checkers used by the analysis: row/column
coverage of the central zone, vertex-boundary expansion of central subsets,
and the suburb diameter bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core import WorldParams
from .stationary import grid_cell_masses

Cell = tuple[int, int]
CellSet = frozenset[Cell]


@dataclass(frozen=True, eq=False)
class ZoneMap:
    """Cell grid with occupancy probabilities and the central/suburb split.

    ``probs[i, j]`` is the stationary probability of the cell with
    south-west corner ``(i * ell, j * ell)``; ``central`` is its boolean
    mask and ``extended_suburb`` marks cells within Manhattan distance
    ``2 * suburb_diameter`` of some suburb cell (corner to corner).
    ``suburb_diameter`` is the reference length
    ``(3/2) L^3 ln(n) / (ell^2 n)`` that bounds how far suburb cells reach
    from their corner.
    """

    n: int
    L: float
    R: float
    m: int
    ell: float
    prob_threshold: float
    probs: np.ndarray
    central: np.ndarray
    extended_suburb: np.ndarray
    suburb_diameter: float

    def __post_init__(self):
        self.probs.setflags(write=False)
        self.central.setflags(write=False)
        self.extended_suburb.setflags(write=False)

    @property
    def cz_size(self) -> int:
        return int(self.central.sum())

    @property
    def suburb_empty(self) -> bool:
        return self.cz_size == self.m * self.m

    def central_cells(self) -> CellSet:
        return frozenset((int(i), int(j)) for i, j in np.argwhere(self.central))

    def suburb_cells(self) -> CellSet:
        return frozenset((int(i), int(j)) for i, j in np.argwhere(~self.central))

    def cell_of(self, x: float, y: float) -> Cell:
        """Grid cell containing (x, y); points on the far edges map to the
        last cell."""
        i = min(int(x / self.ell), self.m - 1)
        j = min(int(y / self.ell), self.m - 1)
        return (i, j)

    def cell_center(self, cell: Cell) -> tuple[float, float]:
        return ((cell[0] + 0.5) * self.ell, (cell[1] + 0.5) * self.ell)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "L": self.L,
            "R": self.R,
            "m": self.m,
            "ell": self.ell,
            "prob_threshold": self.prob_threshold,
            "cz_size": self.cz_size,
            "suburb_size": self.m * self.m - self.cz_size,
            "extended_suburb_size": int(self.extended_suburb.sum()),
            "suburb_diameter": self.suburb_diameter,
        }


def cell_side_bracket(L: float, R: float) -> tuple[float, float]:
    """Admissible range for the cell side: between ``R / (1 + sqrt(5))``
    and ``R / sqrt(5)``."""
    return R / (1.0 + math.sqrt(5.0)), R / math.sqrt(5.0)


def build_zone_map(params: WorldParams) -> ZoneMap:
    """Cut the arena into cells and classify them.

    Raises when ``R > sqrt(2) L`` (a cell construction needs the radius to
    fit the arena) or when the resulting side escapes its admissible
    bracket, which can only happen for ``R > L``.
    """
    n, L, R = params.n, params.L, params.R
    if R > math.sqrt(2.0) * L:
        raise ValueError(
            "communication radius exceeds the arena diagonal; "
            "the cell construction needs R <= sqrt(2) L"
        )
    m = math.ceil(math.sqrt(5.0) * L / R)
    ell = L / m
    lo, hi = cell_side_bracket(L, R)
    if not (lo <= ell <= hi):
        raise ValueError(
            f"cell side {ell} escapes its admissible range [{lo}, {hi}]"
        )
    threshold = (3.0 / 8.0) * math.log(n) / n
    probs = grid_cell_masses(L, m)
    central = probs >= threshold
    suburb_diameter = 1.5 * L**3 * math.log(n) / (ell**2 * n)
    extended = np.zeros((m, m), dtype=bool)
    suburb_idx = np.argwhere(~central)
    if suburb_idx.size:
        ii, jj = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        nearest = np.full((m, m), np.inf)
        for si, sj in suburb_idx:
            np.minimum(nearest, np.abs(ii - si) + np.abs(jj - sj), out=nearest)
        extended = nearest * ell <= 2.0 * suburb_diameter
    return ZoneMap(
        n=n,
        L=L,
        R=R,
        m=m,
        ell=ell,
        prob_threshold=threshold,
        probs=probs,
        central=central,
        extended_suburb=extended,
        suburb_diameter=suburb_diameter,
    )


# ---------------------------------------------------------------------------
# structural checks on the central zone
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverageReport:
    """How many grid rows and columns contain at least one central cell,
    against the floor ``m / sqrt(2)`` both counts must reach."""

    m: int
    rows_with_central: int
    columns_with_central: int
    floor: float

    @property
    def ok(self) -> bool:
        return min(self.rows_with_central, self.columns_with_central) >= self.floor


def cz_row_column_counts(zone_map: ZoneMap) -> CoverageReport:
    """Count grid rows and columns that intersect the central zone."""
    central = zone_map.central
    return CoverageReport(
        m=zone_map.m,
        rows_with_central=int(central.any(axis=0).sum()),  # rows: fixed j
        columns_with_central=int(central.any(axis=1).sum()),  # columns: fixed i
        floor=zone_map.m / math.sqrt(2.0),
    )


def boundary(cells: Iterable[Cell], zone_map: ZoneMap) -> CellSet:
    """Vertex boundary of a central subset: central cells outside the subset
    that share a grid edge with a cell inside it."""
    inside = frozenset(cells)
    central = zone_map.central_cells()
    if not inside <= central:
        raise ValueError("boundary is defined for subsets of the central zone")
    out: set[Cell] = set()
    for (i, j) in inside:
        for d in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nb = (i + d[0], j + d[1])
            if nb in central and nb not in inside:
                out.add(nb)
    return frozenset(out)


@dataclass(frozen=True)
class ExpansionReport:
    """Result of checking ``|boundary(B)| >= sqrt(min(|B|, |CZ| - |B|))``
    over proper nonempty central subsets."""

    cz_size: int
    mode: str
    subsets_checked: int
    violations: int
    worst_margin: float  # min over checked subsets of |∂B| - sqrt(min(...))
    witness: CellSet | None = field(default=None)

    @property
    def ok(self) -> bool:
        return self.violations == 0


EXHAUSTIVE_LIMIT = 20


def expansion_margin(subset: Iterable[Cell], zone_map: ZoneMap) -> float:
    """``|boundary(B)| - sqrt(min(|B|, |CZ| - |B|))`` for one subset."""
    cells = frozenset(subset)
    cz = zone_map.cz_size
    return len(boundary(cells, zone_map)) - math.sqrt(
        min(len(cells), cz - len(cells))
    )


def _central_adjacency(zone_map: ZoneMap) -> tuple[list[Cell], np.ndarray]:
    """Sorted central cells and their grid-adjacency matrix."""
    cells = sorted(zone_map.central_cells())
    pos = {c: k for k, c in enumerate(cells)}
    adj = np.zeros((len(cells), len(cells)), dtype=np.float32)
    for (i, j), k in pos.items():
        for d in ((1, 0), (0, 1)):
            nb = pos.get((i + d[0], j + d[1]))
            if nb is not None:
                adj[k, nb] = 1.0
                adj[nb, k] = 1.0
    return cells, adj


def check_expansion(
    zone_map: ZoneMap,
    mode: str = "auto",
    samples: int = 100_000,
    rng: np.random.Generator | None = None,
) -> ExpansionReport:
    """Verify the boundary-expansion inequality on central subsets.

    ``exhaustive`` enumerates every proper nonempty subset (only feasible
    for small central zones); ``random`` draws uniform subsets with a fixed
    generator, skipping the empty and full draws.  ``auto`` picks exhaustive
    when ``|CZ| <= 20``.
    """
    cells, adj = _central_adjacency(zone_map)
    cz = len(cells)
    if cz < 2:
        return ExpansionReport(cz, "exhaustive", 0, 0, math.inf)
    if mode == "auto":
        mode = "exhaustive" if cz <= EXHAUSTIVE_LIMIT else "random"
    worst = math.inf
    witness: CellSet | None = None
    violations = 0
    checked = 0
    if mode == "exhaustive":
        if cz > EXHAUSTIVE_LIMIT:
            raise ValueError(
                f"exhaustive expansion check limited to {EXHAUSTIVE_LIMIT} "
                f"central cells, got {cz}"
            )
        # neighbour bitmasks make |boundary| a popcount per subset
        nb_masks = [0] * cz
        for k in range(cz):
            for other in np.flatnonzero(adj[k]):
                nb_masks[k] |= 1 << int(other)
        full = (1 << cz) - 1
        roots = [math.sqrt(s) for s in range(cz + 1)]
        for s in range(1, full):
            reach = 0
            x = s
            while x:
                low = x & -x
                reach |= nb_masks[low.bit_length() - 1]
                x ^= low
            size = s.bit_count()
            margin = (reach & ~s & full).bit_count() - roots[min(size, cz - size)]
            checked += 1
            if margin < worst:
                worst = margin
                witness = frozenset(cells[k] for k in range(cz) if s >> k & 1)
            if margin < 0:
                violations += 1
    elif mode == "random":
        if rng is None:
            rng = np.random.default_rng(0)
        batch = 512
        drawn = 0
        while drawn < samples:
            b = min(batch, samples - drawn)
            drawn += b
            masks = rng.random((b, cz)) < 0.5
            sizes = masks.sum(axis=1)
            proper = (sizes > 0) & (sizes < cz)
            masks, sizes = masks[proper], sizes[proper]
            if masks.shape[0] == 0:
                continue
            touched = (masks.astype(np.float32) @ adj) > 0.0
            bounds = (touched & ~masks).sum(axis=1)
            margins = bounds - np.sqrt(np.minimum(sizes, cz - sizes))
            checked += masks.shape[0]
            violations += int((margins < 0).sum())
            low = int(np.argmin(margins))
            if margins[low] < worst:
                worst = float(margins[low])
                witness = frozenset(
                    cells[k] for k in np.flatnonzero(masks[low])
                )
    else:
        raise ValueError(f"unknown expansion mode: {mode!r}")
    return ExpansionReport(cz, mode, checked, violations, worst, witness)


# ---------------------------------------------------------------------------
# suburb diameter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuburbDiameterReport:
    """Worst folded corner coordinate over suburb cells, against the
    allowance ``scale * suburb_diameter`` both coordinates must respect."""

    allowance: float
    worst_distance: float
    worst_cell: Cell | None
    violations: int

    @property
    def ok(self) -> bool:
        return self.violations == 0


def check_suburb_diameter(
    zone_map: ZoneMap, scale: float = 1.0
) -> SuburbDiameterReport:
    """Check both corner coordinates of every suburb cell stay within
    ``scale * suburb_diameter``.

    A suburb cell's coordinates are measured from its nearest arena corner
    to the cell corner facing it: for the south-west quadrant these are the
    cell's south-west corner coordinates, with the mirrored rule in the
    other quadrants.  A cell violates when either coordinate exceeds the
    allowance.
    """
    allowance = scale * zone_map.suburb_diameter
    m, ell = zone_map.m, zone_map.ell
    worst = -math.inf
    worst_cell: Cell | None = None
    violations = 0
    for cell in sorted(zone_map.suburb_cells()):
        i, j = cell
        dx = min(i, m - 1 - i) * ell
        dy = min(j, m - 1 - j) * ell
        far = max(dx, dy)
        if far > worst:
            worst, worst_cell = far, cell
        if far > allowance:
            violations += 1
    if worst == -math.inf:
        worst = 0.0
    return SuburbDiameterReport(allowance, worst, worst_cell, violations)


# ---------------------------------------------------------------------------
# core sub-cells (the middle ninth of every cell)
# ---------------------------------------------------------------------------

def core_bounds(zone_map: ZoneMap, cell: Cell) -> tuple[float, float, float, float]:
    """(x0, x1, y0, y1) of the middle-ninth core of a cell."""
    ell = zone_map.ell
    x0 = (cell[0] + 1.0 / 3.0) * ell
    y0 = (cell[1] + 1.0 / 3.0) * ell
    return x0, x0 + ell / 3.0, y0, y0 + ell / 3.0


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------

def zone_map_to_csv(zone_map: ZoneMap) -> str:
    """CSV of all cells (one row each) prefixed by ``#`` metadata lines."""
    lines = [
        f"# n={zone_map.n} L={zone_map.L!r} R={zone_map.R!r}",
        f"# m={zone_map.m} ell={zone_map.ell!r}",
        f"# prob_threshold={zone_map.prob_threshold!r}",
        f"# suburb_diameter={zone_map.suburb_diameter!r}",
        "i,j,probability,label,core_x0,core_x1,core_y0,core_y1",
    ]
    for i in range(zone_map.m):
        for j in range(zone_map.m):
            label = "CENTRAL" if zone_map.central[i, j] else "SUBURB"
            cx0, cx1, cy0, cy1 = core_bounds(zone_map, (i, j))
            lines.append(
                f"{i},{j},{zone_map.probs[i, j]!r},{label},"
                f"{cx0!r},{cx1!r},{cy0!r},{cy1!r}"
            )
    return "\n".join(lines) + "\n"


def zone_map_svg(zone_map: ZoneMap, size: int = 512) -> str:
    """Deterministic grayscale SVG of the probability grid (black = the
    largest probability, white = zero).  Central cells get a thin outline."""
    m = zone_map.m
    cell_px = size / m
    top = float(zone_map.probs.max())
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
        f'height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for i in range(m):
        for j in range(m):
            shade = zone_map.probs[i, j] / top if top > 0 else 0.0
            level = int(round(255 * (1.0 - shade)))
            color = f"#{level:02x}{level:02x}{level:02x}"
            x = i * cell_px
            # SVG y grows downward; flip so the south row sits at the bottom
            y = (m - 1 - j) * cell_px
            stroke = (
                ' stroke="#cc0000" stroke-width="1"'
                if zone_map.central[i, j]
                else ""
            )
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{cell_px:.2f}" '
                f'height="{cell_px:.2f}" fill="{color}"{stroke}/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
