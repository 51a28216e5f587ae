import pytest

from uniband import aggregation as agg
from uniband.aggregation import ClusterAggregate, RosterEntry


def test_per_capita():
    assert agg.cost_per_capita(1e9, 1e7) == 100
    with pytest.raises(ValueError):
        agg.cost_per_capita(1, 0)


def test_unweighted_mean():
    assert agg.mean_cost_per_capita([100, 200]) == 150
    assert agg.mean_cost_per_capita([42.0]) == 42.0


def _e(iso, pop, gdp=1.0, group="low", cid=1):
    return RosterEntry(iso, cid, pop, gdp, group)


def test_cluster_total():
    assert agg.cluster_total(100, [_e("a", 1e6), _e("b", 2e6)]) == 3e8
    assert agg.cluster_total(100, []) == 0


def test_round_trip_single_member():
    pc = agg.cost_per_capita(5e9, 2e7)
    assert agg.cluster_total(pc, [_e("a", 2e7)]) == 5e9


def test_gdp_share():
    assert agg.gdp_share(1, 10) == 1.0
    assert agg.gdp_share(0, 10) == 0.0
    assert agg.gdp_share(2, 10) == 2 * agg.gdp_share(1, 10)


def test_build_clusters_skips_unrepresented():
    roster = [_e("a", 1, cid=1), _e("b", 1, cid=1), _e("c", 1, cid=2)]
    (cl,) = agg.build_clusters(roster, {"a": 10.0, "b": 30.0})
    assert (cl.cluster_id, cl.cost_per_capita, [m.iso3 for m in cl.members]) == (1, 20.0, ["a", "b"])


def test_income_groups_partition_total():
    clusters = [ClusterAggregate(1, 1.0, [_e("a", 3, 10, "low"), _e("b", 7, 10, "upper-middle")])]
    sec = agg.income_group_report(clusters)
    assert sec.total_usd == 10
    assert sec.groups["low"] == (3, 3.0)
    assert sec.groups["lower-middle"] == (0.0, 0.0)
    assert sum(t for t, _ in sec.groups.values()) == sec.total_usd


def test_single_group_equals_global():
    clusters = [ClusterAggregate(1, 2.5, [_e("a", 3.3), _e("b", 1.1)])]
    sec = agg.income_group_report(clusters)
    assert sec.groups["low"][0] == sec.total_usd


def test_missing_income_group_names_country():
    with pytest.raises(ValueError, match="XYZ"):
        agg.income_group_report([ClusterAggregate(1, 1.0, [_e("XYZ", 1, group="")])])


def test_roster_and_report_io(fixture_dir, tmp_path):
    roster = agg.load_roster(fixture_dir / "roster.csv")
    assert {e.iso3 for e in roster} >= {"KEN", "SYN"}
    sec = agg.income_group_report(agg.build_clusters(roster, {"SYN": 100.0}))
    agg.write_global_report(tmp_path / "g.csv", [("S1", "x", sec)])
    header, row = (tmp_path / "g.csv").read_text().splitlines()
    assert header.split(",") == agg.REPORT_HEADER
    assert row.startswith("S1,x,")
