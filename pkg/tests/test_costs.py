import math

import pytest
from hypothesis import given, settings, strategies as st

from uniband import costs
from uniband.costs import COMPONENTS, CostBook, RegionPricing, StrategyVector
from uniband.country import SpectrumBand


def test_costbook_prices(costbook):
    assert costbook.validate() == []
    assert costbook.price("antenna") == 1500
    with pytest.raises(KeyError, match="unobtainium"):
        costbook.price("unobtainium")


def test_zero_prices_zero_cost(costbook):
    free = CostBook({k: 0 for k in costbook.prices})
    assert costs.ran_cost_dran(free) == 0
    assert costs.ran_cost_cran(free) == 0
    assert costs.site_build_cost(free) == 0


def test_antennas_and_rrus(costbook):
    only = CostBook({k: (v if k in ("antenna", "rru") else 0) for k, v in costbook.prices.items()})
    assert costs.ran_cost_dran(only) == 16_500


def test_site_build(costbook):
    assert costs.site_build_cost(costbook) == 20_000


def test_cran_without_pooling_is_dran_in_a_rack(costbook):
    p = costbook.price
    swapped = (costs.ran_cost_dran(costbook) - p("bbu_cabinet") - p("distributed_power_converter")
               + p("rack_cabinet") + p("cloud_power_converter"))
    assert costs.ran_cost_cran(costbook, v=1, split=1) == swapped


def test_cran_pooling(costbook):
    free = CostBook({k: (v if k == "cots_processing" else 0) for k, v in costbook.prices.items()},
                    virtualization=costbook.virtualization)
    assert costs.ran_cost_cran(free, "rural") == 62.5
    assert costs.ran_cost_cran(costbook, "urban") > costs.ran_cost_cran(costbook, "rural")


def test_network_cost():
    assert costs.network_cost(0, 0, 0) == 0
    assert costs.network_cost(100, 50, 25) == 175


def test_core_prices(costbook):
    assert costbook.price("regional_node_4g") == 20_000
    assert costbook.price("core_node_4g") == 75_000


def test_spectrum():
    band = SpectrumBand(700, 10, "5G", "coverage", 0.02)
    assert costs.spectrum_cost([band], 1_000_000) == pytest.approx(200_000, rel=1e-15)
    assert costs.spectrum_cost([band], 1_000_000, 0.25) == pytest.approx(50_000, rel=1e-15)
    assert costs.spectrum_cost([], 1_000_000) == 0


def test_tax_and_profit():
    assert costs.tax(100, 0.30) == 30
    assert costs.tax(0, 0.3) == 0
    assert costs.tax(100, 0.10) == 10
    assert costs.profit(100 + 20 + 30, 0.20) == 30
    assert costs.profit(123, 0) == 0
    assert costs.profit(200, 0.2) == 2 * costs.profit(100, 0.2)


def test_npv():
    assert costs.npv([1, 2, 3], 0) == 6
    assert costs.npv([0, 105], 0.05) == pytest.approx(100, rel=1e-15)
    assert round(costs.npv([100] * 10, 0.05), 2) == 810.78


def test_sharing():
    comp = {"site_build": 40.0, "ran": 60.0}
    assert costs.apply_sharing(comp, "passive", 3, "urban") == {"site_build": 40.0, "ran": 180.0}
    assert costs.apply_sharing(comp, "baseline", 3, "urban") == {"site_build": 120.0, "ran": 180.0}
    for regime in costs.SHARING:
        assert costs.apply_sharing(comp, regime, 1, "rural") == comp


def test_srn_shares_core_only_in_rural():
    comp = {"core": 10.0, "regional_fiber": 5.0}
    assert costs.apply_sharing(comp, "srn", 3, "rural") == comp
    assert costs.apply_sharing(comp, "srn", 3, "suburban") == {"core": 30.0, "regional_fiber": 15.0}


def test_strategy_vector():
    s = StrategyVector("5G_SA_F", "srn", 0.25, 0.3)
    assert s.name == "5G_SA_F_srn_s0.25_t0.3"
    assert s.generation == "5G"
    with pytest.raises(ValueError, match="moran"):
        StrategyVector("4G_W", "moran")


def test_cross_subsidy():
    res = costs.assess_and_cross_subsidize([("a", 10, 5, 1), ("b", 20, 10, 1)])
    assert (res.viable_coverage, res.residual_deficit) == (1.0, 0.0)
    res = costs.assess_and_cross_subsidize([("a", 20, 10, 1), ("b", 0, 4, 1)])
    assert (res.viable_coverage, res.residual_deficit) == (1.0, 0.0)
    # surplus 10, deficits 8 (cheaper per head) and 6
    res = costs.assess_and_cross_subsidize([("s", 20, 10, 1), ("x", 0, 8, 10), ("y", 0, 6, 1)])
    assert res.residual_deficit == 4
    assert res.subsidies == {"s": 0.0, "x": 0.0, "y": 4.0}
    assert res.viable_coverage == pytest.approx(11 / 12)


def test_government_sign():
    line = costs._line(network=100, admin=0, spectrum=20, tax_=30, profit_=0, subsidy=0)
    assert line["government"] == -50
    assert line["social"] == line["private"] + line["government"] == 100


def _pricing(rid, cls, pop, **comp):
    return RegionPricing(rid, cls, pop, {k: comp.get(k, 0.0) for k in COMPONENTS})


def test_decompose_fully_subsidized_spectrum_invariance(costbook):
    pr = [_pricing("r", "rural", 1000, ran=1e6, site_build=5e5)]
    rows = {}
    for scale in (0.25, 1.0, 2.0):
        dec = costs.decompose(pr, {"r": 0.0}, StrategyVector("4G_W", spectrum_scale=scale), costbook, 3, {"r": 1e5})
        rows[scale] = dec.national
    govs = [r["government"] for r in rows.values()]
    assert max(govs) - min(govs) <= 1e-9 * abs(govs[0])
    assert rows[2.0]["subsidy"] - rows[1.0]["subsidy"] == pytest.approx(3 * 1e5, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.floats(0, 1e7), st.floats(0, 1e7), st.floats(0, 5e7), st.integers(1, 10**6)),
             min_size=1, max_size=6),
    st.sampled_from(costs.TECHNOLOGIES), st.sampled_from(costs.SHARING),
    st.sampled_from((0.25, 1.0, 2.0)), st.integers(1, 5),
)
def test_identities_hold(costbook, regions, tech, sharing, scale, n):
    pr, rev, spec = [], {}, {}
    for i, (ran, site, revenue, pop) in enumerate(regions):
        rid = f"r{i}"
        pr.append(_pricing(rid, ("urban", "rural")[i % 2], pop, ran=ran, site_build=site, core=ran / 7))
        rev[rid] = revenue
        spec[rid] = pop * 1.5
    dec = costs.decompose(pr, rev, StrategyVector(tech, sharing, scale), costbook, n, spec)
    for row in dec.rows.values():
        costs.check_identities(row)
        transfers = row["network"] + row["administration"] + row["profit"] + row["subsidy"]
        assert math.isclose(row["social"], transfers, rel_tol=1e-12)


def test_check_identities_catches_errors():
    row = costs._line(100, 10, 5, 30, 20, 0)
    row["private"] += 1
    with pytest.raises(costs.ConsistencyError, match="private"):
        costs.check_identities(row)


def test_write_decomposition(costbook, tmp_path):
    dec = costs.decompose([_pricing("r", "urban", 10, ran=1.0)], {"r": 100.0},
                          StrategyVector("4G_W"), costbook, 2, {"r": 0.1})
    costs.write_decomposition(tmp_path / "d.csv", "TST", "S1", "x", dec)
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0].startswith("country,scenario,strategy,region_id,network")
    assert [l.split(",")[3] for l in lines[1:]] == ["r", "NATIONAL"]
