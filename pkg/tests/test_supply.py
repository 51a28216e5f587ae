import pytest
from hypothesis import given, strategies as st

from uniband import supply
from uniband.country import BACKHAUL_CLASSES, RegionProfile
from uniband.supply import AssetAllocation

from test_country import _ctx


def test_tower_estimates():
    assert supply.estimate_region_towers(100, 5000, 1_000_000, 50) == 1
    assert supply.estimate_region_towers(0, 5000, 1_000_000, 50) == 0
    assert supply.estimate_region_towers(2000, 5000, 1_000_000, 50) == 20


def test_round_half_up():
    assert [supply.round_half_up(x) for x in (0.5, 1.5, 2.5, 2.49)] == [1, 2, 3, 2]


@pytest.mark.parametrize("cov", [0, -5, 101])
def test_coverage_range(cov):
    with pytest.raises(ValueError):
        supply.estimate_region_towers(1, 1, 1, cov)


def test_greedy_allocation():
    est = [("a", 5), ("b", 3), ("c", 2)]
    assert [a.towers for a in supply.allocate_towers(est, 6)] == [5, 1, 0]
    assert [a.towers for a in supply.allocate_towers(est, 0)] == [0, 0, 0]
    assert [a.towers for a in supply.allocate_towers(est, 100)] == [5, 3, 2]


@given(st.lists(st.integers(0, 50), max_size=12), st.integers(0, 400))
def test_allocation_never_exceeds_stock(estimates, stock):
    allocs = supply.allocate_towers([(str(i), e) for i, e in enumerate(estimates)], stock)
    assert sum(a.towers for a in allocs) == min(stock, sum(estimates))
    assert all(a.towers <= e for a, e in zip(allocs, estimates))


def test_technology_split():
    a = [AssetAllocation("x", towers=10)]
    assert supply.allocate_technology(a, [0.61])[0].towers_4g == 6
    assert supply.allocate_technology(a, [1.0])[0].towers_4g == 10
    assert supply.allocate_technology(a, [0.0])[0].towers_legacy == 10


def _backhaul(towers, profile):
    allocs = [AssetAllocation(str(i), towers=t) for i, t in enumerate(towers)]
    return [a.backhaul_counts for a in supply.allocate_backhaul(allocs, profile)]


def test_backhaul_quota_walk():
    (counts,) = _backhaul([10], dict(zip(BACKHAUL_CLASSES, (0.2, 0.2, 0.4, 0.2))))
    assert [counts[k] for k in BACKHAUL_CLASSES] == [2, 2, 4, 2]


def test_backhaul_density_order():
    counts = _backhaul([3, 3, 4], dict(zip(BACKHAUL_CLASSES, (0.2, 0.2, 0.4, 0.2))))
    assert counts[0] == {"fiber": 2, "copper": 1, "microwave": 0, "satellite": 0}
    assert counts[2] == {"fiber": 0, "copper": 0, "microwave": 2, "satellite": 2}


def test_all_fiber_and_single_tower():
    assert _backhaul([4], {"fiber": 1, "copper": 0, "microwave": 0, "satellite": 0})[0]["fiber"] == 4
    (one,) = _backhaul([1], {"fiber": 0, "copper": 0.3, "microwave": 0.7, "satellite": 0})
    assert one["copper"] == 1


def test_baseline_assets_density_order():
    regions = [RegionProfile("rural", 100, 1000, "rural"), RegionProfile("city", 1, 1000, "urban")]
    ctx = _ctx(population_total=2000, national_towers=3, coverage_2g=1.0)
    allocs = supply.baseline_assets(regions, ctx)
    # each region wants 1.5 -> 2, the denser city is filled first
    assert [(a.region_id, a.towers) for a in allocs] == [("city", 2), ("rural", 1)]
