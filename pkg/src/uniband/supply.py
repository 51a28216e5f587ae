"""Existing tower stock per region, split by technology and backhaul."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from .country import BACKHAUL_CLASSES, RegionProfile


@dataclass
class AssetAllocation:
    region_id: str
    towers: int = 0
    towers_4g: int = 0
    towers_legacy: int = 0
    backhaul_counts: dict = field(default_factory=lambda: {k: 0 for k in BACKHAUL_CLASSES})


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def estimate_region_towers(region_pop, national_towers, national_pop, coverage):
    """Towers per covered head times regional population. ``coverage`` is in percent."""
    if not 0 < coverage <= 100:
        raise ValueError("coverage must lie in (0, 100] percent")
    if national_pop <= 0:
        raise ValueError("national population must be positive")
    return round_half_up(region_pop * national_towers / (national_pop * coverage / 100.0))


def density_order(regions: list[RegionProfile]) -> list[RegionProfile]:
    """Densest first; equal densities fall back to region_id."""
    return sorted(regions, key=lambda r: (-r.pop_density, r.region_id))


def allocate_towers(estimates, national_stock):
    """Greedy fill of ``(region_id, estimate)`` pairs, already in density order."""
    if national_stock < 0:
        raise ValueError("tower stock must be non-negative")
    remaining = national_stock
    out = []
    for region_id, est in estimates:
        take = min(est, remaining)
        remaining -= take
        out.append(AssetAllocation(region_id, towers=take, towers_legacy=take))
    return out


def allocate_technology(allocations, coverage_4g_by_region):
    """Split towers into 4G and legacy by each region's 4G coverage fraction."""
    for alloc, cov in zip(allocations, coverage_4g_by_region):
        if not 0 <= cov <= 1:
            raise ValueError(f"4G coverage for {alloc.region_id} must be a fraction")
        alloc.towers_4g = min(alloc.towers, round_half_up(alloc.towers * cov))
        alloc.towers_legacy = alloc.towers - alloc.towers_4g
    return allocations


def allocate_backhaul(allocations, profile):
    """Walk towers densest-first, filling fiber, copper, microwave, satellite quotas.

    Quotas are ceilings of the cumulative national shares, so a class with a
    non-zero share is never rounded away entirely.
    """
    if abs(sum(profile.get(k, 0.0) for k in BACKHAUL_CLASSES) - 1.0) > 1e-9:
        raise ValueError("backhaul profile must sum to 1")
    total = sum(a.towers for a in allocations)
    bounds = []
    cum = 0.0
    for k in BACKHAUL_CLASSES:
        cum += profile.get(k, 0.0)
        # guard against 0.30000000000000004-style overshoot before ceiling
        bounds.append(min(total, math.ceil(round(cum * total, 9))))
    bounds[-1] = total

    rank = 0
    for alloc in allocations:
        counts = {k: 0 for k in BACKHAUL_CLASSES}
        for _ in range(alloc.towers):
            cls = next(k for k, b in zip(BACKHAUL_CLASSES, bounds) if rank < b)
            counts[cls] += 1
            rank += 1
        alloc.backhaul_counts = counts
    return allocations


def baseline_assets(regions: list[RegionProfile], ctx) -> list[AssetAllocation]:
    """Run the full allocation for a country; output follows density order."""
    ordered = density_order(regions)
    coverage_pct = ctx.coverage_2g * 100.0
    estimates = [
        (r.region_id, estimate_region_towers(r.population, ctx.national_towers, ctx.population_total, coverage_pct))
        for r in ordered
    ]
    allocs = allocate_towers(estimates, ctx.national_towers)
    allocate_technology(
        allocs, [ctx.coverage_4g if r.coverage_4g is None else r.coverage_4g for r in ordered]
    )
    allocate_backhaul(allocs, ctx.backhaul_profile)
    return allocs


def write_baseline_assets(allocs, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["region_id", "towers", "towers_4g", *BACKHAUL_CLASSES])
        for a in sorted(allocs, key=lambda a: a.region_id):
            w.writerow([a.region_id, a.towers, a.towers_4g, *(a.backhaul_counts[k] for k in BACKHAUL_CLASSES)])
