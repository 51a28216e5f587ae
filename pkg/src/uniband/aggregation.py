"""Scale representative-country results up to clusters and income groups."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from .country import INCOME_GROUPS


@dataclass(frozen=True)
class RosterEntry:
    iso3: str
    cluster_id: int
    population: float
    gdp_annual: float
    income_group: str


@dataclass
class ClusterAggregate:
    cluster_id: int
    cost_per_capita: float
    members: list = field(default_factory=list)  # RosterEntry

    @property
    def cluster_total(self) -> float:
        return cluster_total(self.cost_per_capita, self.members)


def cost_per_capita(national_social_cost, population) -> float:
    if population <= 0:
        raise ValueError("population must be positive")
    return national_social_cost / population


def mean_cost_per_capita(values) -> float:
    """Unweighted mean across a cluster's representatives."""
    values = list(values)
    if not values:
        raise ValueError("no representative values")
    return math.fsum(values) / len(values)


def cluster_total(per_capita, members) -> float:
    for m in members:
        if m.population <= 0:
            raise ValueError(f"member {m.iso3} has non-positive population")
    return per_capita * math.fsum(m.population for m in members)


def gdp_share(total_cost, annual_gdp, horizon=10) -> float:
    if annual_gdp <= 0:
        raise ValueError("GDP must be positive")
    return 100.0 * total_cost / (annual_gdp * horizon)


def build_clusters(roster: list[RosterEntry], per_capita_by_rep: dict) -> list[ClusterAggregate]:
    """Clusters that have at least one representative in ``per_capita_by_rep``."""
    by_cluster: dict[int, list[RosterEntry]] = {}
    for entry in roster:
        by_cluster.setdefault(entry.cluster_id, []).append(entry)
    out = []
    for cid in sorted(by_cluster):
        members = by_cluster[cid]
        reps = [per_capita_by_rep[m.iso3] for m in members if m.iso3 in per_capita_by_rep]
        if not reps:
            continue
        out.append(ClusterAggregate(cid, mean_cost_per_capita(reps), sorted(members, key=lambda m: m.iso3)))
    return out


@dataclass
class GlobalSection:
    total_usd: float
    gdp_share: float
    groups: dict  # income group -> (total, gdp share)


def income_group_report(clusters: list[ClusterAggregate], income_groups: dict | None = None, horizon=10) -> GlobalSection:
    """Totals and GDP shares per income group; groups partition the global total."""
    totals = {g: [] for g in INCOME_GROUPS}
    gdps = {g: [] for g in INCOME_GROUPS}
    for cl in clusters:
        for m in cl.members:
            group = (income_groups or {}).get(m.iso3, m.income_group)
            if group not in totals:
                raise ValueError(f"country {m.iso3} has no valid income group")
            totals[group].append(cl.cost_per_capita * m.population)
            gdps[group].append(m.gdp_annual)
    groups = {}
    for g in INCOME_GROUPS:
        t = math.fsum(totals[g])
        gdp = math.fsum(gdps[g])
        groups[g] = (t, gdp_share(t, gdp, horizon) if gdp > 0 else 0.0)
    total = math.fsum(groups[g][0] for g in INCOME_GROUPS)
    gdp = math.fsum(x for g in INCOME_GROUPS for x in gdps[g])
    return GlobalSection(total, gdp_share(total, gdp, horizon) if gdp > 0 else 0.0, groups)


def load_roster(path) -> list[RosterEntry]:
    with open(path, newline="") as fh:
        return [
            RosterEntry(
                row["iso3"],
                int(row["cluster_id"]),
                float(row["population"]),
                float(row["gdp_annual_usd"]),
                row["income_group"],
            )
            for row in csv.DictReader(fh)
        ]


REPORT_HEADER = [
    "scenario", "strategy", "total_usd", "gdp_share_10yr_pct",
    *(f"{g}_{col}" for g in INCOME_GROUPS for col in ("total_usd", "gdp_share_pct")),
]


def write_global_report(path, sections: list[tuple[str, str, GlobalSection]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for scenario, strategy, sec in sections:
            row = [scenario, strategy, repr(sec.total_usd), repr(sec.gdp_share)]
            for g in INCOME_GROUPS:
                row += [repr(sec.groups[g][0]), repr(sec.groups[g][1])]
            w.writerow(row)
