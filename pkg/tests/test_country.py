import json
import math

import numpy as np
import pytest

from uniband import country
from uniband.country import (
    CountryContext, GridFormatError, PopulationGrid, RegionProfile, SpectrumBand, ValidationError,
)


def _grid(values, cell=1.0):
    return PopulationGrid(0.0, 0.0, cell, np.asarray(values, dtype=float))


def _write(tmp_path, text):
    p = tmp_path / "g.asc"
    p.write_text(text)
    return p


HEADER = "ncols 3\nnrows 3\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n"


def test_grid_totals():
    assert _grid(np.zeros((2, 2))).total() == 0
    assert _grid(np.ones((3, 3))).total() == 9


def test_nodata_cell_excluded(tmp_path):
    g = country.load_population_grid(_write(tmp_path, HEADER + "1 1 1\n1 -9999 1\n1 1 1\n"))
    assert g.total() == 8
    assert math.isnan(g.values[1, 1])


def test_grid_roundtrip(tmp_path):
    g = PopulationGrid(0.0, 0.0, 1.0, np.array([[1, 2], [3, np.nan]]), -9999.0)
    country.write_population_grid(g, tmp_path / "x.asc")
    back = country.load_population_grid(tmp_path / "x.asc")
    np.testing.assert_array_equal(np.nan_to_num(back.values, nan=-1), [[1, 2], [3, -1]])


@pytest.mark.parametrize(
    "body, match",
    [
        ("1 1 1\n1 1\n1 1 1\n", "line 8"),
        ("1 1 1\n1 x 1\n1 1 1\n", "line 8"),
        ("1 1 1\n1 1 1\n", "expected 3 data rows"),
    ],
)
def test_malformed_grid_names_line(tmp_path, body, match):
    with pytest.raises(GridFormatError, match=match):
        country.load_population_grid(_write(tmp_path, HEADER + body))


def test_missing_header_key(tmp_path):
    with pytest.raises(GridFormatError, match="cellsize"):
        country.load_population_grid(_write(tmp_path, "ncols 1\nnrows 1\nxllcorner 0\nyllcorner 0\n5\n"))


def test_negative_population_rejected(tmp_path):
    with pytest.raises(ValidationError, match="row 0, col 2"):
        country.load_population_grid(_write(tmp_path, HEADER + "1 1 -3\n1 1 1\n1 1 1\n"))


def test_cell_center_row_zero_is_north():
    g = _grid(np.ones((3, 2)), cell=2.0)
    assert g.cell_center(0, 0) == (1.0, 5.0)
    assert g.cell_center(2, 1) == (3.0, 1.0)


def test_single_region_whole_grid():
    (r,) = country.regionalize(_grid(np.ones((3, 3))), {"A": [[0, 3, 0, 3]]})
    assert (r.population, r.area, r.pop_density) == (9, 9.0, 1.0)


def test_half_grid_regions_equal():
    a, b = country.regionalize(_grid(np.full((4, 4), 7.0)), {"A": [[0, 2, 0, 4]], "B": [[2, 4, 0, 4]]})
    assert a.population == b.population == 56


def test_l_shaped_region_matches_cell_enumeration():
    rng = np.random.default_rng(3)
    vals = rng.integers(0, 100, (6, 6)).astype(float)
    rects = [[0, 4, 0, 2], [2, 4, 2, 5]]  # an L
    cells = {(r, c) for r0, r1, c0, c1 in rects for r in range(r0, r1) for c in range(c0, c1)}
    oracle = sum(vals[r, c] for r, c in cells)
    (region, _) = country.regionalize(_grid(vals), {"L": rects, "Z": [[4, 6, 0, 6], [0, 2, 2, 6], [2, 4, 5, 6]]})
    assert region.population == oracle
    assert region.area == len(cells)


def test_overlap_rejected():
    with pytest.raises(ValidationError, match="overlaps"):
        country.rasterize_masks((3, 3), {"A": [[0, 2, 0, 2]], "B": [[1, 3, 1, 3]]})


def test_unclaimed_cells_go_to_nearest_region(caplog):
    labels, ids = country.region_labels(_grid(np.ones((1, 4))), {"A": [[0, 1, 0, 1]], "B": [[0, 1, 3, 4]]})
    assert labels.tolist() == [[0, 0, 1, 1]]
    assert "outside every region" in caplog.text


@pytest.mark.parametrize("density, cls", [(0, "rural"), (5000, "urban"), (300, "suburban"), (1500, "urban"), (299.9, "rural")])
def test_classify_settlement(density, cls):
    assert country.classify_settlement(density) == cls


def _ctx(**kw):
    base = dict(
        iso3="TST", population_total=1000, gdp_per_capita=1000.0, income_group="low", n_mnos=3,
        penetration_2020=0.5, penetration_growth=0.03, smartphone_base_urban=0.5, smartphone_base_rural=0.3,
        smartphone_growth=0.05, arpu_tiers={"high": 5, "medium": 3, "low": 1},
        spectrum_portfolio=(SpectrumBand(800, 10, "4G", "coverage", 0.1),), coverage_4g=0.5, coverage_2g=0.9,
        national_towers=10, backhaul_profile={"fiber": 0.5, "copper": 0.2, "microwave": 0.2, "satellite": 0.1},
    )
    base.update(kw)
    return CountryContext(**base)


def test_valid_context():
    assert country.validate_country(_ctx()) == []


def test_backhaul_fractions_must_sum_to_one():
    bad = _ctx(backhaul_profile={"fiber": 0.5, "copper": 0.2, "microwave": 0.1, "satellite": 0.1})
    assert [v.field for v in country.validate_country(bad)] == ["backhaul_profile"]


def test_zero_operators():
    assert "n_mnos" in [v.field for v in country.validate_country(_ctx(n_mnos=0))]


def test_all_violations_reported():
    fields = {v.field for v in country.validate_country(_ctx(n_mnos=0, income_group="rich", penetration_2020=1.5))}
    assert fields == {"n_mnos", "income_group", "penetration_2020"}


def test_context_json_roundtrip(tmp_path):
    ctx = _ctx(spectrum_portfolio=(SpectrumBand(3500, 50, "5G", "capacity", 0.08, "TDD", 0.7),))
    text = country.dumps_country(ctx)
    (tmp_path / "c.json").write_text(text)
    back = country.load_country(tmp_path / "c.json")
    assert back == ctx
    assert country.dumps_country(back) == text
    assert json.loads(text)["spectrum_portfolio"][0]["dl_fraction"] == 0.7


def test_tdd_downlink_share():
    assert SpectrumBand(3500, 50, "5G", "capacity", 0.1, "TDD", 0.7).downlink_bandwidth == pytest.approx(35.0)
    assert SpectrumBand(800, 10, "4G", "coverage", 0.1).downlink_bandwidth == 10


def test_region_validation():
    regions = [RegionProfile("a", 1.0, 5, "rural"), RegionProfile("a", 0.0, 5, "metro")]
    messages = [str(v) for v in country.validate_regions(regions)]
    assert any("duplicate" in m for m in messages)
    assert any("area" in m for m in messages)
    assert any("metro" in m for m in messages)


def test_bundled_fixture_loads(fixture_dir):
    bundle = country.load_country_dir(fixture_dir / "SYN")
    assert country.validate_country(bundle.context) == []
    assert country.validate_regions(bundle.regions) == []
    assert sum(r.population for r in bundle.regions) == bundle.context.population_total
    # region table agrees with the raster it was cut from
    pops = {r.region_id: r.population for r in country.regionalize(bundle.grid, bundle.boundaries)}
    assert pops == {r.region_id: r.population for r in bundle.regions}
    assert {r.settlement_class for r in bundle.regions} == {"urban", "suburban", "rural"}
