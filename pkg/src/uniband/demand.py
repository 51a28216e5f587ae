"""Per-region traffic demand and revenue over the assessment horizon."""
from __future__ import annotations

from dataclasses import dataclass

from .country import CountryContext, RegionProfile

BASE_YEAR = 2020
HORIZON = 10


@dataclass(frozen=True)
class Scenario:
    name: str
    urban: float  # Mbps per user
    suburban: float
    rural: float
    obf: float = 20.0

    def __post_init__(self):
        if not self.urban >= self.suburban >= self.rural >= 0:
            raise ValueError(f"scenario {self.name}: targets must be urban >= suburban >= rural")
        if self.obf < 1:
            raise ValueError(f"scenario {self.name}: obf must be >= 1")

    def target(self, settlement_class: str) -> float:
        return getattr(self, settlement_class)


SCENARIOS = {
    "S1": Scenario("S1", 25.0, 10.0, 2.0),
    "S2": Scenario("S2", 200.0, 50.0, 5.0),
    "S3": Scenario("S3", 400.0, 100.0, 10.0),
}


@dataclass(frozen=True)
class DemandTimeline:
    region_id: str
    years: tuple
    users_per_km2: tuple
    smartphones_per_km2: tuple
    demand_mbps_per_km2: tuple
    revenue_usd: tuple  # undiscounted, per year, hypothetical operator
    discounted_revenue_total: float

    @property
    def peak_demand(self) -> float:
        return max(self.demand_mbps_per_km2)


def users_per_km2(pop_density, penetration, networks):
    if networks < 1:
        raise ValueError("number of networks must be at least 1")
    return pop_density * penetration / networks


def penetration_forecast(base, growth, year_offset):
    return min(1.0, base * (1.0 + growth) ** year_offset)


def demand_mbps_per_km2(users, smartphone_pen, target_capacity, obf):
    if obf < 1:
        raise ValueError("overbooking factor must be >= 1")
    return users * smartphone_pen * target_capacity / obf


def arpu_for_region(mean_luminosity, tiers: dict) -> float:
    """Monthly ARPU from region luminosity; tier cut-offs are strict (> 20, > 15 DN)."""
    if mean_luminosity > 20:
        return tiers["high"]
    if mean_luminosity > 15:
        return tiers["medium"]
    return tiers["low"]


def revenue_npv(arpu, users_by_year, discount_rate):
    if discount_rate < 0:
        raise ValueError("discount rate must be non-negative")
    total = 0.0
    for t, users in enumerate(users_by_year):
        total += arpu * users * 12 / (1.0 + discount_rate) ** t
    return total


def smartphone_base(ctx: CountryContext, settlement_class: str) -> float:
    # suburban areas take the urban survey rate
    return ctx.smartphone_base_rural if settlement_class == "rural" else ctx.smartphone_base_urban


def forecast_region(
    region: RegionProfile,
    ctx: CountryContext,
    scenario: Scenario,
    discount_rate: float = 0.05,
    horizon: int = HORIZON,
) -> DemandTimeline:
    """Per-operator demand and revenue for one region, t = 0 is 2020."""
    target = scenario.target(region.settlement_class)
    arpu = arpu_for_region(region.mean_luminosity, ctx.arpu_tiers)
    sp_base = smartphone_base(ctx, region.settlement_class)
    density = region.pop_density
    users, phones, demand, revenue = [], [], [], []
    for t in range(horizon):
        pen = penetration_forecast(ctx.penetration_2020, ctx.penetration_growth, t)
        sp = penetration_forecast(sp_base, ctx.smartphone_growth, t)
        u = users_per_km2(density, pen, ctx.n_mnos)
        users.append(u)
        phones.append(u * sp)
        demand.append(demand_mbps_per_km2(u, sp, target, scenario.obf))
        revenue.append(arpu * u * region.area * 12)
    npv = revenue_npv(arpu, [u * region.area for u in users], discount_rate)
    return DemandTimeline(
        region_id=region.region_id,
        years=tuple(range(BASE_YEAR, BASE_YEAR + horizon)),
        users_per_km2=tuple(users),
        smartphones_per_km2=tuple(phones),
        demand_mbps_per_km2=tuple(demand),
        revenue_usd=tuple(revenue),
        discounted_revenue_total=npv,
    )
