"""Turn demand density into site counts and the links that serve them."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from .radio import CapacityLUT, area_capacity

CLOUD_NODE_AREA_KM2 = 40.0
COVERAGE_RADIUS_KM = 25.0


@dataclass
class SitePlan:
    region_id: str
    required_density: float
    required_sites: int
    brownfield_upgrades: int
    greenfield_builds: int
    backhaul_links: list = field(default_factory=list)  # (technology/class, length m)
    cloud_nodes: int = 0
    fronthaul_total: float = 0.0
    capacity_limited: bool = False

    def backhaul_class_counts(self) -> dict:
        counts: dict[str, int] = {}
        for cls, _ in self.backhaul_links:
            counts[cls] = counts.get(cls, 0) + 1
        return counts


def capacity_curve(bands, cells_per_site, lut: CapacityLUT, technology) -> list[tuple[float, float]]:
    """(density, Mbps/km2) at every LUT density, starting from the origin.

    Bands are matched to the nearest LUT frequency of the technology.
    """
    if not lut.entries:
        raise ValueError("capacity LUT is empty")
    freq_map = {b.frequency: lut.nearest_frequency(technology, b.frequency) for b in bands}
    dens = sorted(set.intersection(*(set(lut.densities(technology, f)) for f in set(freq_map.values()))))
    if not dens:
        raise ValueError(f"LUT has no common density axis for {technology}")
    curve = [(0.0, 0.0)]
    for d in dens:
        se = {b.frequency: lut.se(technology, freq_map[b.frequency], d) for b in bands}
        curve.append((d, area_capacity(se, cells_per_site, d, bands)))
    return curve


def invert_capacity(demand, curve) -> tuple[float, bool]:
    """Smallest density meeting ``demand`` on a piecewise-linear capacity curve.

    Returns ``(density, capacity_limited)``; demand beyond every point clamps
    to the densest entry.
    """
    if demand <= 0:
        return 0.0, False
    for (d0, c0), (d1, c1) in zip(curve, curve[1:]):
        if c1 >= demand:
            if c0 >= demand:
                return d0, False
            return d0 + (d1 - d0) * (demand - c0) / (c1 - c0), False
    return curve[-1][0], True


def required_site_density(demand, bands, cells_per_site, lut: CapacityLUT, technology="4G"):
    return invert_capacity(demand, capacity_curve(bands, cells_per_site, lut, technology))


def coverage_floor_density(radius_km=COVERAGE_RADIUS_KM) -> float:
    return 1.0 / (math.pi * radius_km**2)


def upgrade_plan(required_sites, existing_towers, existing_on_tech=0):
    """(brownfield, greenfield) for a target site count.

    Sites already on the target technology need no RAN spend; the rest of
    the existing stock is upgraded before anything new is built.
    """
    if required_sites < 0 or existing_towers < 0 or existing_on_tech < 0:
        raise ValueError("site counts must be non-negative")
    need = max(0, required_sites - existing_on_tech)
    upgradable = existing_towers - existing_on_tech
    brownfield = min(need, upgradable)
    return brownfield, need - brownfield


def mean_backhaul_distance(node_density) -> float:
    """Mean distance (m) from a site to the nearest of uniformly spread nodes."""
    if node_density <= 0:
        raise ValueError("node density must be positive")
    return math.sqrt(1.0 / (2.0 * node_density)) * 1000.0


def microwave_class(length_m) -> str:
    if length_m < 0:
        raise ValueError("link length must be non-negative")
    km = length_m / 1000.0
    if km < 20:
        return "small"
    if km <= 40:
        return "medium"
    return "large"


def backhaul_link_class(length_m, backhaul="wireless", settlement_class="rural"):
    """Cost class of a new backhaul link: microwave size or fiber by settlement."""
    if backhaul == "wireless":
        return f"microwave_{microwave_class(length_m)}"
    if length_m < 0:
        raise ValueError("link length must be non-negative")
    return f"fiber_{settlement_class}"


def cran_topology(area, site_density, sites=None):
    """(cloud_nodes, fronthaul_total m, mean_site_spacing m) for a region."""
    if area <= 0 or site_density <= 0:
        raise ValueError("area and site density must be positive")
    nodes = math.ceil(area / CLOUD_NODE_AREA_KM2)
    spacing = math.sqrt(1.0 / site_density) / 2.0 * 1000.0
    if sites is None:
        sites = math.ceil(site_density * area)
    return nodes, max(0, sites - nodes) * spacing, spacing


def write_site_plans(plans, path) -> None:
    classes = sorted({c for p in plans for c, _ in p.backhaul_links})
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            ["region_id", "required_density", "required_sites", "brownfield", "greenfield",
             *classes, "backhaul_length_m", "cloud_nodes", "fronthaul_m", "capacity_limited"]
        )
        for p in sorted(plans, key=lambda p: p.region_id):
            counts = p.backhaul_class_counts()
            w.writerow(
                [p.region_id, repr(p.required_density), p.required_sites, p.brownfield_upgrades,
                 p.greenfield_builds, *(counts.get(c, 0) for c in classes),
                 repr(float(sum(length for _, length in p.backhaul_links))),
                 p.cloud_nodes, repr(float(p.fronthaul_total)), int(p.capacity_limited)]
            )
