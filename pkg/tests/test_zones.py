"""Grid construction, central-zone geometry, boundary expansion, suburb checks."""

import math

import numpy as np
import pytest

from mrwpflood.core import WorldParams
from mrwpflood.zones import (
    EXHAUSTIVE_LIMIT,
    ZoneMap,
    boundary,
    build_zone_map,
    cell_side_bracket,
    check_expansion,
    check_suburb_diameter,
    core_bounds,
    cz_row_column_counts,
    expansion_margin,
    zone_map_svg,
    zone_map_to_csv,
)


def world(n=500, L=None, R=None, v=None, c1=2.5, seed=0, **kw):
    L = math.sqrt(n) if L is None else L
    R = c1 * L * math.sqrt(math.log(n) / n) if R is None else R
    v = R / 9.7 if v is None else v
    return WorldParams(n=n, L=L, R=R, v=v, c1=c1, seed=seed, **kw)


def hand_map(central: np.ndarray, n: int = 1000, L: float = 10.0) -> ZoneMap:
    """Assemble a ZoneMap with a hand-chosen central mask (uniform probs)."""
    m = central.shape[0]
    ell = L / m
    probs = np.full((m, m), 1.0 / (m * m))
    return ZoneMap(
        n=n,
        L=L,
        R=ell * math.sqrt(5.0),
        m=m,
        ell=ell,
        prob_threshold=0.0,
        probs=probs,
        central=central.astype(bool),
        extended_suburb=~central.astype(bool),
        suburb_diameter=1.5 * L**3 * math.log(n) / (ell**2 * n),
    )


class TestCellSideBracket:
    def test_bracket_order_and_m(self):
        L, R = 10.0, 3.0
        lo, hi = cell_side_bracket(L, R)
        assert lo == pytest.approx(R / (1 + math.sqrt(5)))
        assert hi == pytest.approx(R / math.sqrt(5))
        assert lo < hi

    def test_built_cell_side_lies_in_bracket(self):
        for n in (100, 500, 2000, 10_000):
            p = world(n=n)
            z = build_zone_map(p)
            lo, hi = cell_side_bracket(p.L, p.R)
            assert lo <= z.ell <= hi
            assert z.m == math.ceil(math.sqrt(5.0) * p.L / p.R)
            assert z.ell * z.m == pytest.approx(p.L)


class TestBuildZoneMap:
    def test_radius_too_large_rejected(self):
        p = WorldParams(n=100, L=10.0, R=15.0, v=0.1)
        with pytest.raises(ValueError):
            build_zone_map(p)

    def test_threshold_value(self):
        p = world(n=2000)
        z = build_zone_map(p)
        assert z.prob_threshold == pytest.approx(
            (3.0 / 8.0) * math.log(2000) / 2000, rel=1e-15
        )

    def test_probabilities_sum_to_one(self):
        z = build_zone_map(world(n=2000))
        assert z.probs.sum() == pytest.approx(1.0, abs=1e-9)

    def test_central_mask_matches_threshold(self):
        z = build_zone_map(world(n=2000))
        assert np.array_equal(z.central, z.probs >= z.prob_threshold)

    def test_four_fold_symmetry(self):
        # the stationary law is symmetric under both reflections, so the
        # central mask must be too
        z = build_zone_map(world(n=3000))
        assert np.array_equal(z.central, z.central[::-1, :])
        assert np.array_equal(z.central, z.central[:, ::-1])
        assert np.array_equal(z.central, z.central.T)

    def test_corner_cells_have_least_mass(self):
        z = build_zone_map(world(n=2000))
        corner = z.probs[0, 0]
        assert corner == z.probs.min()
        assert z.probs.max() == z.probs[(z.m - 1) // 2 : z.m // 2 + 1,
                                        (z.m - 1) // 2 : z.m // 2 + 1].max()

    def test_suburb_sits_in_extended_suburb(self):
        z = build_zone_map(world(n=3000))
        assert not (~z.central & ~z.extended_suburb).any()

    def test_cell_lookup(self):
        z = build_zone_map(world(n=500))
        assert z.cell_of(0.0, 0.0) == (0, 0)
        assert z.cell_of(z.L, z.L) == (z.m - 1, z.m - 1)  # far edge folds in
        i, j = z.cell_of(z.L / 2, z.ell / 2)
        assert i == z.m // 2 and j == 0

    def test_cell_center(self):
        z = build_zone_map(world(n=500))
        cx, cy = z.cell_center((0, 0))
        assert cx == pytest.approx(z.ell / 2) and cy == pytest.approx(z.ell / 2)

    def test_large_radius_regime_has_no_suburb(self):
        # radius at (1+sqrt(5))/2 * L * (3 ln n / n)^(1/3) or more makes
        # every cell central (each cell mass clears the threshold)
        n = 2000
        L = math.sqrt(n)
        R = (1 + math.sqrt(5)) / 2 * L * (3 * math.log(n) / n) ** (1 / 3)
        z = build_zone_map(WorldParams(n=n, L=L, R=R, v=0.1))
        assert z.suburb_empty
        assert z.cz_size == z.m * z.m

    def test_to_dict_fields(self):
        z = build_zone_map(world(n=500))
        d = z.to_dict()
        assert d["m"] == z.m and d["cz_size"] == z.cz_size
        assert d["suburb_diameter"] == pytest.approx(
            1.5 * z.L**3 * math.log(z.n) / (z.ell**2 * z.n)
        )


class TestCoverage:
    def test_every_row_and_column_hit_on_built_maps(self):
        for n in (500, 2000, 5000):
            z = build_zone_map(world(n=n))
            rep = cz_row_column_counts(z)
            assert rep.ok
            assert rep.rows_with_central == z.m
            assert rep.columns_with_central == z.m
            assert rep.floor == pytest.approx(z.m / math.sqrt(2.0))

    def test_single_row_map_fails_coverage(self):
        central = np.zeros((4, 4), dtype=bool)
        central[:, 2] = True  # all central cells share one grid row
        z = hand_map(central)
        rep = cz_row_column_counts(z)
        assert rep.rows_with_central == 1
        assert rep.columns_with_central == 4
        assert not rep.ok


class TestBoundary:
    def test_empty_set(self):
        z = build_zone_map(world(n=500))
        assert boundary([], z) == frozenset()

    def test_full_cz_has_empty_boundary(self):
        z = build_zone_map(world(n=500))
        assert boundary(z.central_cells(), z) == frozenset()

    def test_interior_cell_has_four_neighbours(self):
        z = build_zone_map(world(n=500))
        mid = (z.m // 2, z.m // 2)
        b = boundary([mid], z)
        assert len(b) == 4
        assert all(abs(i - mid[0]) + abs(j - mid[1]) == 1 for i, j in b)

    def test_non_central_member_rejected(self):
        central = np.zeros((3, 3), dtype=bool)
        central[1, 1] = True
        z = hand_map(central)
        with pytest.raises(ValueError):
            boundary([(0, 0)], z)

    def test_boundary_stays_central(self):
        z = build_zone_map(world(n=2000))
        cells = list(z.central_cells())[:5]
        for cell in boundary(cells, z):
            assert z.central[cell]


class TestExpansion:
    def test_margin_matches_reference_definition(self):
        z = build_zone_map(world(n=500))
        subset = list(z.central_cells())[: z.cz_size // 3]
        margin = expansion_margin(subset, z)
        expected = len(boundary(subset, z)) - math.sqrt(
            min(len(subset), z.cz_size - len(subset))
        )
        assert margin == pytest.approx(expected)

    def test_exhaustive_on_all_central_grid(self):
        central = np.ones((2, 2), dtype=bool)
        z = hand_map(central)
        rep = check_expansion(z, mode="exhaustive")
        assert rep.mode == "exhaustive"
        assert rep.subsets_checked == 2**4 - 2  # nonempty proper subsets
        assert rep.violations == 0
        assert rep.ok
        assert rep.worst_margin >= 0

    def test_exhaustive_agrees_with_reference_margins(self):
        central = np.ones((3, 3), dtype=bool)
        central[0, 0] = False
        z = hand_map(central)
        rep = check_expansion(z, mode="exhaustive")
        cells = sorted(z.central_cells())
        worst = math.inf
        for mask in range(1, 2 ** len(cells) - 1):
            subset = [cells[k] for k in range(len(cells)) if mask >> k & 1]
            worst = min(worst, expansion_margin(subset, z))
        assert rep.worst_margin == pytest.approx(worst)
        assert rep.violations == (0 if worst >= 0 else 1)

    def test_disconnected_set_violates(self):
        # two far-apart central cells in a sea of suburb: the subset holding
        # both has boundary 0 but sqrt(min(2, ...)) > 0
        central = np.zeros((5, 5), dtype=bool)
        central[0, 0] = central[4, 4] = central[2, 2] = True
        z = hand_map(central)
        rep = check_expansion(z, mode="exhaustive")
        assert rep.violations > 0
        assert not rep.ok
        assert rep.worst_margin < 0
        assert rep.witness is not None

    def test_random_mode_on_built_map(self):
        z = build_zone_map(world(n=2000))
        rep = check_expansion(z, mode="random", samples=2000)
        assert rep.mode == "random"
        assert rep.subsets_checked == 2000
        assert rep.violations == 0

    def test_auto_picks_exhaustive_below_limit(self):
        central = np.ones((3, 3), dtype=bool)
        z = hand_map(central)
        rep = check_expansion(z)  # 9 cells <= EXHAUSTIVE_LIMIT
        assert rep.mode == "exhaustive"
        assert z.cz_size <= EXHAUSTIVE_LIMIT

    def test_auto_picks_random_above_limit(self):
        z = build_zone_map(world(n=2000))  # hundreds of central cells
        rep = check_expansion(z, samples=500)
        assert rep.mode == "random"

    def test_random_mode_reproducible(self):
        z = build_zone_map(world(n=2000))
        a = check_expansion(z, mode="random", samples=500,
                            rng=np.random.default_rng(5))
        b = check_expansion(z, mode="random", samples=500,
                            rng=np.random.default_rng(5))
        assert a.worst_margin == b.worst_margin


class TestSuburbDiameter:
    def test_built_maps_pass(self):
        for n in (500, 2000, 10_000):
            z = build_zone_map(world(n=n))
            rep = check_suburb_diameter(z)
            assert rep.ok
            assert rep.violations == 0
            assert rep.allowance == z.suburb_diameter

    def test_scaled_down_allowance_fires(self):
        # S/20 is smaller than the actual corner suburbs on dense sweeps
        z = build_zone_map(world(n=10_000, c1=2.0))
        assert not z.suburb_empty
        rep = check_suburb_diameter(z, scale=1.0 / 20.0)
        assert rep.violations > 0
        assert not rep.ok

    def test_empty_suburb_trivially_ok(self):
        n = 2000
        L = math.sqrt(n)
        R = (1 + math.sqrt(5)) / 2 * L * (3 * math.log(n) / n) ** (1 / 3)
        z = build_zone_map(WorldParams(n=n, L=L, R=R, v=0.1))
        rep = check_suburb_diameter(z, scale=1e-9)
        assert rep.ok and rep.violations == 0

    def test_folded_coordinates(self):
        # a suburb cell near the far corner counts by distance to that
        # corner, not to the origin
        central = np.ones((4, 4), dtype=bool)
        central[3, 3] = False
        z = hand_map(central)
        rep = check_suburb_diameter(z)
        # folded coords of (3,3) on a 4-grid: min(3, 0) = 0 in both axes
        assert rep.worst_distance == 0.0


class TestCoreBounds:
    def test_middle_ninth(self):
        z = build_zone_map(world(n=500))
        x0, x1, y0, y1 = core_bounds(z, (1, 2))
        assert x0 == pytest.approx(1 * z.ell + z.ell / 3)
        assert x1 == pytest.approx(1 * z.ell + 2 * z.ell / 3)
        assert y0 == pytest.approx(2 * z.ell + z.ell / 3)
        assert y1 == pytest.approx(2 * z.ell + 2 * z.ell / 3)
        assert (x1 - x0) == pytest.approx(z.ell / 3)


class TestRendering:
    def test_csv_contains_every_cell(self):
        z = build_zone_map(world(n=500))
        text = zone_map_to_csv(z)
        rows = [l for l in text.splitlines() if l and not l.startswith("#")]
        assert len(rows) == z.m * z.m + 1  # header + cells

    def test_svg_well_formed(self):
        z = build_zone_map(world(n=500))
        svg = zone_map_svg(z)
        assert svg.startswith("<?xml") or svg.startswith("<svg")
        assert svg.count("<rect") >= z.m * z.m
        assert "</svg>" in svg
