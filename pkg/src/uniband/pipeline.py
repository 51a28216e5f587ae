"""Country assessment and the scenario x strategy sweep.

``prepare_country`` does the strategy-independent work once (tower stock,
fiber extension); ``assess`` prices one (scenario, strategy) pair.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import aggregation, country, demand, dimensioning, fiber, radio, supply
from .costs import (
    SHARING, TECH_PROFILE, TECHNOLOGIES, CostBook, StrategyVector,
    decompose, load_costbook, price_region, spectrum_cost, write_decomposition,
)
from .demand import SCENARIOS, Scenario

logger = logging.getLogger(__name__)

FIBER_DEFAULTS = {"density_threshold": 500.0, "settlement_threshold": 1000.0, "buffer_m": 2000.0}


class ConfigError(ValueError):
    """Run configuration failed validation."""

    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass
class PreparedCountry:
    context: country.CountryContext
    regions: list
    assets: dict  # region_id -> AssetAllocation
    regional_fiber_m: dict  # region_id -> new fiber metres
    fiber_nodes: dict  # region_id -> count of fiber nodes (>= 1)
    core_region: str
    fiber_plan: fiber.FiberPlan | None = None


def prepare_country(bundle: country.CountryBundle, fiber_settings: dict | None = None) -> PreparedCountry:
    ctx = bundle.context
    regions = sorted(bundle.regions, key=lambda r: r.region_id)
    allocs = supply.baseline_assets(regions, ctx)
    assets = {a.region_id: a for a in allocs}

    fs = {**FIBER_DEFAULTS, **(fiber_settings or {})}
    new_m = {r.region_id: 0.0 for r in regions}
    nodes = {r.region_id: 1 for r in regions}
    plan = None
    if bundle.grid is not None and bundle.boundaries is not None:
        labels, ids = country.region_labels(bundle.grid, bundle.boundaries)
        settlements = fiber.extract_settlements(
            bundle.grid, fs["density_threshold"], fs["settlement_threshold"], labels, ids
        )
        existing = bundle.fiber_existing or []
        fiber.mark_connected(settlements, existing, fs["buffer_m"])
        per_region: dict[str, int] = {}
        for s in settlements:
            per_region[s.region_id] = per_region.get(s.region_id, 0) + 1
        for rid, n in per_region.items():
            if rid in nodes:
                nodes[rid] = max(1, n)
        anchors = fiber.attachment_points(existing)
        if settlements and (anchors or all(s.connected for s in settlements)):
            plan = fiber.design_regional_fiber(settlements, anchors, existing)
            by_id = {s.id: s for s in settlements}
            density = {r.region_id: r.pop_density for r in regions}
            for (src, dst), edge in zip(plan.edge_ends, plan.new_edges):
                ends = [by_id[x].region_id for x in (src, dst) if x in by_id]
                owner = max(ends, key=lambda rid: (density.get(rid, 0.0), rid))
                if owner in new_m:
                    new_m[owner] += edge[4]
        elif settlements:
            logger.warning("%s: no existing fiber to attach settlements to", ctx.iso3)

    with_core = [r.region_id for r in regions if r.has_core_node]
    core_region = with_core[0] if with_core else supply.density_order(regions)[0].region_id

    enriched = []
    for r in regions:
        a = assets[r.region_id]
        enriched.append(
            country.with_assets(
                r,
                existing_sites=a.towers,
                site_technology={"legacy": a.towers_legacy, "4G": a.towers_4g},
                backhaul_mix=dict(a.backhaul_counts),
            )
        )
    return PreparedCountry(ctx, enriched, assets, new_m, nodes, core_region, plan)


def plan_region(region, timeline, strategy: StrategyVector, prepared: PreparedCountry, lut, costbook: CostBook,
                coverage_radius_km=dimensioning.COVERAGE_RADIUS_KM) -> dimensioning.SitePlan:
    gen, arch, backhaul, _ = TECH_PROFILE[strategy.technology]
    bands = prepared.context.bands(gen)
    density, limited = dimensioning.required_site_density(
        timeline.peak_demand, bands, costbook.sectors, lut, gen
    )
    if region.population > 0:
        density = max(density, dimensioning.coverage_floor_density(coverage_radius_km))
    required = math.ceil(round(density * region.area, 9)) if density > 0 else 0

    alloc = prepared.assets[region.region_id]
    on_tech = alloc.towers_4g if gen == "4G" else 0
    brown, green = dimensioning.upgrade_plan(required, alloc.towers, on_tech)

    distance = dimensioning.mean_backhaul_distance(prepared.fiber_nodes[region.region_id] / region.area)
    plan = dimensioning.SitePlan(region.region_id, density, required, brown, green, capacity_limited=limited)
    if arch == "cran":
        if required > 0:
            nodes, fronthaul, _ = dimensioning.cran_topology(region.area, density, required)
            plan.cloud_nodes, plan.fronthaul_total = nodes, fronthaul
        return plan

    bh = alloc.backhaul_counts
    adequate = bh["fiber"] + (bh["microwave"] if backhaul == "wireless" else 0)
    # brownfield sites take the best existing backhaul first
    new_links = green + brown - min(brown, adequate)
    cls = dimensioning.backhaul_link_class(distance, backhaul, region.settlement_class)
    plan.backhaul_links = [(cls, distance)] * new_links
    return plan


@dataclass
class TripleResult:
    iso3: str
    scenario: str
    strategy: str
    decomposition: object
    site_plans: list


def assess(prepared: PreparedCountry, scenario: Scenario, strategy: StrategyVector, lut, costbook: CostBook,
           coverage_radius_km=dimensioning.COVERAGE_RADIUS_KM) -> TripleResult:
    ctx = prepared.context
    gen = strategy.generation
    bands = ctx.bands(gen)
    pricings, revenues, spectrum, plans = [], {}, {}, []
    for region in prepared.regions:
        tl = demand.forecast_region(region, ctx, scenario, costbook.discount_rate, costbook.horizon)
        plan = plan_region(region, tl, strategy, prepared, lut, costbook, coverage_radius_km)
        plans.append(plan)
        distance = dimensioning.mean_backhaul_distance(prepared.fiber_nodes[region.region_id] / region.area)
        pricings.append(
            price_region(
                plan, region, strategy, costbook,
                regional_fiber_m=prepared.regional_fiber_m[region.region_id],
                core_node=region.region_id == prepared.core_region,
                backhaul_distance_m=distance,
            )
        )
        revenues[region.region_id] = ctx.n_mnos * tl.discounted_revenue_total
        spectrum[region.region_id] = spectrum_cost(bands, region.population)
    dec = decompose(pricings, revenues, strategy, costbook, ctx.n_mnos, spectrum)
    return TripleResult(ctx.iso3, scenario.name, strategy.name, dec, plans)


# -- run configuration ------------------------------------------------------

@dataclass
class RunConfig:
    countries: list
    scenarios: list
    strategies: list
    seed: int = 0
    output_dir: str = "out"
    lut: str = "generate"
    parallelism: int = 1
    roster: str | None = None
    costbook: str | None = None
    settlement_thresholds: dict | None = None
    fiber: dict = field(default_factory=dict)
    radio: dict = field(default_factory=dict)
    coverage_radius_km: float = dimensioning.COVERAGE_RADIUS_KM
    base_dir: str = "."

    def resolve(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else Path(self.base_dir) / p

    def canonical(self) -> dict:
        """Config content that determines output bytes (no paths to outputs, no job count)."""
        d = asdict(self)
        for k in ("output_dir", "parallelism", "base_dir"):
            d.pop(k)
        return d

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.canonical(), sort_keys=True).encode()).hexdigest()


def _scenario(obj) -> Scenario:
    if isinstance(obj, str):
        if obj not in SCENARIOS:
            raise ValueError(f"unknown scenario {obj!r}")
        return SCENARIOS[obj]
    return Scenario(obj["name"], obj["urban"], obj["suburban"], obj["rural"], obj.get("obf", 20.0))


def _strategy(obj) -> StrategyVector:
    return StrategyVector(
        obj["technology"], obj.get("sharing", "baseline"),
        obj.get("spectrum_scale", 1.0), obj.get("tax_rate", 0.30),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    raw = json.loads(path.read_text())
    raw.setdefault("base_dir", str(path.parent))
    known = set(RunConfig.__dataclass_fields__)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError([f"unknown config keys: {', '.join(unknown)}"])
    return RunConfig(**raw)


def validate(config: RunConfig) -> list[str]:
    """Structural and referential problems; empty when the config is runnable."""
    problems = []
    if not config.countries:
        problems.append("countries: list is empty")
    if not config.scenarios:
        problems.append("scenarios: list is empty")
    if not config.strategies:
        problems.append("strategies: list is empty")
    for s in config.scenarios:
        try:
            _scenario(s)
        except (ValueError, KeyError, TypeError) as exc:
            problems.append(f"scenarios: {exc}")
    for s in config.strategies:
        if not isinstance(s, dict):
            problems.append(f"strategies: entry {s!r} is not an object")
            continue
        for key, allowed in (("technology", TECHNOLOGIES), ("sharing", SHARING)):
            value = s.get(key, "baseline" if key == "sharing" else None)
            if value not in allowed:
                problems.append(f"strategies: unknown {key} {value!r}")
        try:
            _strategy(s)
        except (ValueError, KeyError, TypeError) as exc:
            if "unknown" not in str(exc):
                problems.append(f"strategies: {exc}")
    if not isinstance(config.seed, int):
        problems.append("seed: must be an integer")
    if not isinstance(config.parallelism, int) or config.parallelism < 1:
        problems.append("parallelism: must be a positive integer")

    iso = []
    for c in config.countries:
        d = config.resolve(c)
        for name in ("country.json", "regions.csv"):
            if not (d / name).exists():
                problems.append(f"countries: {d / name} does not exist")
        if (d / "country.json").exists():
            try:
                ctx = country.load_country(d / "country.json")
                iso.append(ctx.iso3)
                problems += [f"country {ctx.iso3}: {v}" for v in country.validate_country(ctx)]
            except (KeyError, TypeError, ValueError) as exc:
                problems.append(f"countries: {d / 'country.json'} unreadable ({exc})")
    if config.lut != "generate" and not config.resolve(config.lut).exists():
        problems.append(f"lut: {config.lut} does not exist")
    if config.costbook and not config.resolve(config.costbook).exists():
        problems.append(f"costbook: {config.costbook} does not exist")
    if config.roster:
        rp = config.resolve(config.roster)
        if not rp.exists():
            problems.append(f"roster: {rp} does not exist")
        else:
            listed = {e.iso3 for e in aggregation.load_roster(rp)}
            for code in iso:
                if code not in listed:
                    problems.append(f"roster: country {code} missing from roster")
    return problems


# -- sweep ------------------------------------------------------------------

def _run_triple(args):
    prepared, scenario, strategy, lut, costbook, radius = args
    return assess(prepared, scenario, strategy, lut, costbook, radius)


def build_lut(config: RunConfig, jobs=1) -> radio.CapacityLUT:
    if config.lut != "generate":
        return radio.CapacityLUT.from_csv(config.resolve(config.lut))
    params = radio.RadioParams(**config.radio)
    return radio.build_capacity_lut(params=params, seed=config.seed, jobs=jobs)


def run_sweep(config: RunConfig, out_dir=None, jobs=None, emit_intermediates=False) -> dict:
    """Assess every (country, scenario, strategy) triple and write the output tree.

    Nothing is written unless every country validates and every triple
    prices cleanly. Returns the manifest.
    """
    problems = validate(config)
    if problems:
        raise ConfigError(problems)
    jobs = config.parallelism if jobs is None else jobs
    out = Path(out_dir) if out_dir is not None else config.resolve(config.output_dir)

    costbook = load_costbook(config.resolve(config.costbook) if config.costbook else None)
    bundles = [country.load_country_dir(config.resolve(c), config.settlement_thresholds) for c in config.countries]
    region_problems = []
    for b in bundles:
        region_problems += [f"country {b.context.iso3}: {v}" for v in country.validate_regions(b.regions)]
    if region_problems:
        raise ConfigError(region_problems)

    prepared = [prepare_country(b, config.fiber) for b in bundles]
    lut = build_lut(config, jobs)
    scenarios = [_scenario(s) for s in config.scenarios]
    strategies = [_strategy(s) for s in config.strategies]
    work = [
        (p, sc, st, lut, costbook, config.coverage_radius_km)
        for p in prepared for sc in scenarios for st in strategies
    ]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_run_triple, work))
    else:
        results = [_run_triple(w) for w in work]

    sections = []
    if config.roster:
        roster = aggregation.load_roster(config.resolve(config.roster))
        pops = {p.context.iso3: p.context.population_total for p in prepared}
        for sc in scenarios:
            for st in strategies:
                per_cap = {
                    r.iso3: aggregation.cost_per_capita(r.decomposition.national["social"], pops[r.iso3])
                    for r in results if r.scenario == sc.name and r.strategy == st.name
                }
                clusters = aggregation.build_clusters(roster, per_cap)
                sections.append((sc.name, st.name, aggregation.income_group_report(clusters, horizon=costbook.horizon)))

    # every result is in memory; only now touch the filesystem
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        files = []
        for r in results:
            d = tmp / r.iso3 / r.scenario / r.strategy
            d.mkdir(parents=True, exist_ok=True)
            write_decomposition(d / "decomposition.csv", r.iso3, r.scenario, r.strategy, r.decomposition)
            dimensioning.write_site_plans(r.site_plans, d / "site_plan.csv")
            files += [d / "decomposition.csv", d / "site_plan.csv"]
        report = tmp / "global_report.csv"
        aggregation.write_global_report(report, sections)
        files.append(report)
        if emit_intermediates:
            for p in prepared:
                d = tmp / p.context.iso3
                d.mkdir(parents=True, exist_ok=True)
                supply.write_baseline_assets(list(p.assets.values()), d / "baseline_assets.csv")
                files.append(d / "baseline_assets.csv")
                if p.fiber_plan is not None:
                    (d / "fiber_plan.json").write_text(p.fiber_plan.to_json())
                    files.append(d / "fiber_plan.json")

        manifest = {
            "config_sha256": config.digest(),
            "seed": config.seed,
            "triples": [[r.iso3, r.scenario, r.strategy] for r in results],
            "files": {
                str(f.relative_to(tmp)): hashlib.sha256(f.read_bytes()).hexdigest()
                for f in sorted(files)
            },
        }
        (tmp / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

        out.mkdir(parents=True, exist_ok=True)
        for f in sorted(tmp.rglob("*")):
            if f.is_file():
                dest = out / f.relative_to(tmp)
                dest.parent.mkdir(parents=True, exist_ok=True)
                dest.write_bytes(f.read_bytes())
    return manifest
