"""Network pricing under sharing regimes, and the split of cost between operator and state.

All money is discounted USD with 2020 as year 0. Operator cash flows are
discounted at the WACC, revenue at the plain discount rate.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

TECHNOLOGIES = ("4G_W", "4G_F", "5G_NSA_W", "5G_SA_F")
SHARING = ("baseline", "passive", "active", "srn")
COST_FIELDS = (
    "network", "administration", "spectrum", "tax", "profit",
    "subsidy", "private", "government", "social",
)

# technology -> (generation, ran architecture, backhaul, node price suffix)
TECH_PROFILE = {
    "4G_W": ("4G", "dran", "wireless", "4g"),
    "4G_F": ("4G", "dran", "fiber", "4g"),
    "5G_NSA_W": ("5G", "dran", "wireless", "5g_nsa"),
    "5G_SA_F": ("5G", "cran", "fiber", "5g_sa"),
}

PASSIVE = frozenset({"site_build", "rental"})
ACTIVE = PASSIVE | {"ran", "power", "maintenance", "backhaul"}
NETWORK_CORE = frozenset({"core", "regional_fiber"})
COMPONENTS = ("site_build", "rental", "ran", "power", "maintenance", "backhaul", "core", "regional_fiber")


class ConsistencyError(RuntimeError):
    """A cost decomposition broke one of its accounting identities."""


@dataclass(frozen=True)
class CostBook:
    prices: dict
    sectors: int = 3
    maintenance_rate: float = 0.10
    admin_rate: float = 0.20
    wacc: float = 0.15
    discount_rate: float = 0.05
    profit_margin: float = 0.20
    tax_rate: float = 0.30
    horizon: int = 10
    virtualization: dict = field(default_factory=lambda: {"urban": 2, "suburban": 4, "rural": 16})
    split_factor: float = 7

    def price(self, item: str) -> float:
        try:
            return self.prices[item]
        except KeyError:
            raise KeyError(f"cost book has no price for {item!r}") from None

    @classmethod
    def from_dict(cls, d: dict) -> "CostBook":
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "prices": dict(self.prices),
            "sectors": self.sectors,
            "maintenance_rate": self.maintenance_rate,
            "admin_rate": self.admin_rate,
            "wacc": self.wacc,
            "discount_rate": self.discount_rate,
            "profit_margin": self.profit_margin,
            "tax_rate": self.tax_rate,
            "horizon": self.horizon,
            "virtualization": dict(self.virtualization),
            "split_factor": self.split_factor,
        }

    def validate(self) -> list[str]:
        errors = [f"price {k} is negative" for k, v in self.prices.items() if v < 0]
        for name in ("maintenance_rate", "admin_rate", "profit_margin", "tax_rate"):
            if not 0 <= getattr(self, name) <= 1:
                errors.append(f"{name} must be a fraction")
        return errors


def load_costbook(path=None) -> CostBook:
    if path is None:
        text = resources.files("uniband.data").joinpath("costbook.json").read_text()
    else:
        text = Path(path).read_text()
    return CostBook.from_dict(json.loads(text))


@dataclass(frozen=True)
class StrategyVector:
    technology: str
    sharing: str = "baseline"
    spectrum_scale: float = 1.0
    tax_rate: float = 0.30

    def __post_init__(self):
        if self.technology not in TECHNOLOGIES:
            raise ValueError(f"unknown technology {self.technology!r}")
        if self.sharing not in SHARING:
            raise ValueError(f"unknown sharing regime {self.sharing!r}")
        if not self.spectrum_scale > 0:
            raise ValueError("spectrum scale must be positive")
        if self.tax_rate < 0:
            raise ValueError("tax rate must be non-negative")

    @property
    def name(self) -> str:
        return f"{self.technology}_{self.sharing}_s{self.spectrum_scale:g}_t{self.tax_rate:g}"

    @property
    def generation(self) -> str:
        return TECH_PROFILE[self.technology][0]


# -- unit costs -------------------------------------------------------------

def radio_units(costbook: CostBook) -> float:
    return costbook.sectors * (costbook.price("antenna") + costbook.price("rru"))


def ran_cost_dran(costbook: CostBook) -> float:
    """On-site baseband stack plus per-sector antennas and remote radio units."""
    p = costbook.price
    return (
        p("io_fronthaul_interface")  # interface
        + p("low_latency_switch")  # fronthaul
        + p("cots_processing")  # baseband processing
        + p("cots_processing")  # general processing
        + p("control_unit")
        + p("alarm_unit")
        + p("fan_cooling")
        + p("distributed_power_converter")
        + p("bbu_cabinet")
        + radio_units(costbook)
    )


def ran_cost_cran(costbook: CostBook, settlement_class="urban", v=None, split=None) -> float:
    """Per-site cost with pooled processing in a local cloud node.

    Processing is divided by the virtualization ratio ``v``. The shared
    front-end equipment (listed below) is divided ``split`` ways.
    """
    p = costbook.price
    v = costbook.virtualization[settlement_class] if v is None else v
    split = costbook.split_factor if split is None else split
    if v < 1 or split < 1:
        raise ValueError("pooling factors must be >= 1")
    shared = p("io_fronthaul_interface") + p("low_latency_switch") + p("rack_cabinet") + p("cloud_power_converter")
    return (
        shared / split
        + (p("cots_processing") + p("cots_processing")) / v
        + p("control_unit")
        + p("alarm_unit")
        + p("fan_cooling")
        + radio_units(costbook)
    )


def site_build_cost(costbook: CostBook) -> float:
    p = costbook.price
    return p("tower") + p("civil_materials") + p("transportation") + p("installation")


def network_cost(ran, backhaul, core):
    return ran + backhaul + core


def spectrum_cost(bands, population, scale=1.0) -> float:
    if population < 0:
        raise ValueError("population must be non-negative")
    return sum(b.price * b.bandwidth * population * scale for b in bands)


def tax(network, tax_rate):
    if tax_rate < 0:
        raise ValueError("tax rate must be non-negative")
    return network * tax_rate


def profit(base, margin):
    if margin < 0:
        raise ValueError("profit margin must be non-negative")
    return base * margin


def npv(cashflows, rate) -> float:
    if rate <= -1:
        raise ValueError("rate must exceed -1")
    return sum(cf / (1.0 + rate) ** t for t, cf in enumerate(cashflows))


def annuity_factor(rate, horizon) -> float:
    """Present value of 1 paid at the start of each of ``horizon`` years."""
    return npv([1.0] * horizon, rate)


# -- sharing ----------------------------------------------------------------

def shared_components(sharing: str, settlement_class: str) -> frozenset:
    if sharing == "baseline":
        return frozenset()
    if sharing == "passive":
        return PASSIVE
    if sharing == "active":
        return ACTIVE
    if sharing == "srn":
        return ACTIVE | NETWORK_CORE if settlement_class == "rural" else ACTIVE
    raise ValueError(f"unknown sharing regime {sharing!r}")


def apply_sharing(components: dict, sharing: str, n_mnos: int, settlement_class: str) -> dict:
    """Market cost per component: shared items are paid once, the rest by every operator."""
    if n_mnos < 1:
        raise ValueError("need at least one operator")
    shared = shared_components(sharing, settlement_class)
    return {k: v * (1 if k in shared else n_mnos) for k, v in components.items()}


# -- per-region pricing -----------------------------------------------------

@dataclass
class RegionPricing:
    region_id: str
    settlement_class: str
    population: int
    components: dict  # per-operator NPV by component


def price_region(plan, region, strategy: StrategyVector, costbook: CostBook, regional_fiber_m=0.0,
                 core_node=False, backhaul_distance_m=0.0) -> RegionPricing:
    """Per-operator NPV of each network component for one region's site plan."""
    gen, arch, backhaul, suffix = TECH_PROFILE[strategy.technology]
    p = costbook.price
    cls = region.settlement_class
    ann = annuity_factor(costbook.wacc, costbook.horizon)
    touched = plan.brownfield_upgrades + plan.greenfield_builds

    per_site_ran = ran_cost_dran(costbook) if arch == "dran" else ran_cost_cran(costbook, cls)
    generator = p(f"power_generator_{gen.lower()}")
    active_capex = touched * (per_site_ran + generator)

    backhaul_capex = 0.0
    for link_cls, length in plan.backhaul_links:
        if link_cls.startswith("microwave_"):
            backhaul_capex += p(link_cls)
        else:
            backhaul_capex += length * p(link_cls)
    if arch == "cran":
        fiber_price = p(f"fiber_{cls}")
        backhaul_capex += plan.fronthaul_total * fiber_price
        backhaul_capex += plan.cloud_nodes * (p("local_cloud_node_5g_sa") + backhaul_distance_m * fiber_price)

    core_capex = 0.0
    if not region.has_core_node:
        core_capex += p("regional_cloud_node_5g_sa" if suffix == "5g_sa" else f"regional_node_{suffix}")
    if core_node:
        core_capex += p("core_cloud_node_5g_sa" if suffix == "5g_sa" else f"core_node_{suffix}")

    components = {
        "site_build": plan.greenfield_builds * site_build_cost(costbook),
        "rental": plan.greenfield_builds * p(f"site_rental_{cls}") * ann,
        "ran": active_capex + plan.brownfield_upgrades * p("installation"),
        "power": touched * p(f"power_opex_{gen.lower()}") * ann,
        "maintenance": costbook.maintenance_rate * active_capex * ann,
        "backhaul": backhaul_capex,
        "core": core_capex,
        "regional_fiber": regional_fiber_m * p("regional_fiber"),
    }
    return RegionPricing(region.region_id, cls, region.population, components)


# -- viability --------------------------------------------------------------

@dataclass
class SubsidyResult:
    viable_coverage: float
    residual_deficit: float
    subsidies: dict  # region_id -> subsidy


def assess_and_cross_subsidize(regions) -> SubsidyResult:
    """Pool surpluses and spend them on deficits, cheapest per head first.

    ``regions`` holds ``(region_id, revenue, private_cost, population)``.
    A region counts as covered only when its whole deficit is met.
    """
    pool = 0.0
    deficits = []
    total_pop = 0
    covered_pop = 0
    for rid, revenue, cost, pop in regions:
        total_pop += pop
        if revenue >= cost:
            pool += revenue - cost
            covered_pop += pop
        else:
            per_head = (cost - revenue) / pop if pop > 0 else math.inf
            deficits.append((per_head, rid, cost - revenue, pop))
    subsidies = {rid: 0.0 for rid, *_ in regions}
    residual = 0.0
    for _, rid, deficit, pop in sorted(deficits):
        used = min(pool, deficit)
        pool -= used
        gap = deficit - used
        subsidies[rid] = gap
        residual += gap
        if gap == 0:
            covered_pop += pop
    coverage = covered_pop / total_pop if total_pop > 0 else 1.0
    return SubsidyResult(coverage, residual, subsidies)


# -- decomposition ----------------------------------------------------------

@dataclass
class CostDecomposition:
    rows: dict  # region_id (and "NATIONAL") -> {field: value}
    viable_coverage: float = 1.0

    @property
    def national(self) -> dict:
        return self.rows["NATIONAL"]


def _line(network, admin, spectrum, tax_, profit_, subsidy) -> dict:
    private = network + admin + spectrum + tax_ + profit_
    government = subsidy - spectrum - tax_
    social = network + admin + profit_ + subsidy
    return {
        "network": network,
        "administration": admin,
        "spectrum": spectrum,
        "tax": tax_,
        "profit": profit_,
        "subsidy": subsidy,
        "private": private,
        "government": government,
        "social": social,
    }


def check_identities(row: dict, rtol=1e-12) -> None:
    scale = max(1.0, *(abs(v) for v in row.values()))
    lhs = row["network"] + row["administration"] + row["spectrum"] + row["tax"] + row["profit"]
    if abs(row["private"] - lhs) > rtol * scale:
        raise ConsistencyError(f"private cost identity broken: {row}")
    if abs(row["government"] - (row["subsidy"] - row["spectrum"] - row["tax"])) > rtol * scale:
        raise ConsistencyError(f"government cost identity broken: {row}")
    if abs(row["social"] - (row["government"] + row["private"])) > rtol * scale:
        raise ConsistencyError(f"social cost identity broken: {row}")


def decompose(pricings, revenues: dict, strategy: StrategyVector, costbook: CostBook, n_mnos: int,
              spectrum_by_region: dict) -> CostDecomposition:
    """Market-level cost lines per region and nationally.

    ``spectrum_by_region`` is the per-operator licence cost at scale 1; the
    strategy's scale and operator count are applied here. The profit margin
    is taken on network cost plus tax: spectrum fees pass straight to the
    government and earn no margin.
    """
    ann = annuity_factor(costbook.wacc, costbook.horizon)
    pre = {}
    for pr in pricings:
        market = apply_sharing(pr.components, strategy.sharing, n_mnos, pr.settlement_class)
        network = sum(market[k] for k in COMPONENTS)
        admin = costbook.admin_rate * network / costbook.horizon * ann
        spectrum = n_mnos * spectrum_by_region[pr.region_id] * strategy.spectrum_scale
        tax_ = tax(network, strategy.tax_rate)
        profit_ = profit(network + tax_, costbook.profit_margin)
        pre[pr.region_id] = (network, admin, spectrum, tax_, profit_, pr.population)

    subsidy = assess_and_cross_subsidize(
        [
            (rid, revenues[rid], n + a + s + t + p, pop)
            for rid, (n, a, s, t, p, pop) in sorted(pre.items())
        ]
    )
    rows = {}
    for rid, (n, a, s, t, p, _) in sorted(pre.items()):
        rows[rid] = _line(n, a, s, t, p, subsidy.subsidies[rid])
    totals = [math.fsum(rows[r][f] for r in rows) for f in COST_FIELDS[:6]]
    rows["NATIONAL"] = _line(*totals)
    for row in rows.values():
        check_identities(row)
    return CostDecomposition(rows, subsidy.viable_coverage)


def write_decomposition(path, country, scenario, strategy_name, decomposition: CostDecomposition) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "scenario", "strategy", "region_id", *COST_FIELDS])
        for rid, row in decomposition.rows.items():
            w.writerow([country, scenario, strategy_name, rid, *(repr(float(row[f])) for f in COST_FIELDS)])
