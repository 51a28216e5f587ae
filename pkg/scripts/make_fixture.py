"""Regenerate the bundled synthetic-country fixture under src/uniband/data/fixture.

Run from the repository root: ``python3 scripts/make_fixture.py``.
"""
import csv
import json
from pathlib import Path

import numpy as np

from uniband import country
from uniband.country import CountryContext, PopulationGrid, SpectrumBand

OUT = Path(__file__).resolve().parents[1] / "src" / "uniband" / "data" / "fixture"
CELL_KM = 2.0
NROWS, NCOLS = 30, 40
BLOCK = 5  # region rectangles are BLOCK x BLOCK cells

# (row, col, peak people/km2, spread km)
TOWNS = [(6, 8, 6000.0, 3.5), (22, 30, 3500.0, 3.0), (14, 21, 1200.0, 3.0), (25, 6, 800.0, 2.0)]
RURAL_BASE = 25.0


def population_grid(rng):
    rows, cols = np.mgrid[0:NROWS, 0:NCOLS]
    density = np.full((NROWS, NCOLS), RURAL_BASE)
    for r, c, peak, spread in TOWNS:
        d2 = ((rows - r) ** 2 + (cols - c) ** 2) * CELL_KM**2
        density += peak * np.exp(-d2 / (2 * spread**2))
    density *= rng.lognormal(0.0, 0.15, density.shape)
    return PopulationGrid(0.0, 0.0, CELL_KM, np.round(density * CELL_KM**2))


def boundaries():
    out = {}
    for i in range(NROWS // BLOCK):
        for j in range(NCOLS // BLOCK):
            rid = f"SYN.{i * (NCOLS // BLOCK) + j + 1:02d}"
            out[rid] = [[i * BLOCK, (i + 1) * BLOCK, j * BLOCK, (j + 1) * BLOCK]]
    return out


def luminosity(pop_density):
    return round(float(min(60.0, 4.0 + 6.0 * np.log10(1.0 + pop_density))), 3)


def main():
    rng = np.random.default_rng(20200101)
    grid = population_grid(rng)
    bounds = boundaries()
    regions = country.regionalize(grid, bounds)
    total = sum(r.population for r in regions)
    densest = max(regions, key=lambda r: r.pop_density).region_id

    ctx = CountryContext(
        iso3="SYN",
        population_total=total,
        gdp_per_capita=1700.0,
        income_group="lower-middle",
        n_mnos=3,
        penetration_2020=0.5,
        penetration_growth=0.03,
        smartphone_base_urban=0.6,
        smartphone_base_rural=0.3,
        smartphone_growth=0.05,
        arpu_tiers={"high": 8.0, "medium": 4.0, "low": 2.0},
        spectrum_portfolio=(
            SpectrumBand(800, 10, "4G", "coverage", 0.15),
            SpectrumBand(1800, 10, "4G", "capacity", 0.08),
            SpectrumBand(700, 10, "5G", "coverage", 0.15),
            SpectrumBand(3500, 50, "5G", "capacity", 0.08, "TDD", 0.7),
        ),
        coverage_4g=0.6,
        coverage_2g=0.95,
        national_towers=total // 2000,
        backhaul_profile={"fiber": 0.1, "copper": 0.05, "microwave": 0.8, "satellite": 0.05},
    )
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "SYN").mkdir(exist_ok=True)
    (OUT / "SYN" / "country.json").write_text(country.dumps_country(ctx))
    country.write_population_grid(grid, OUT / "SYN" / "popgrid.asc")
    (OUT / "SYN" / "boundaries.json").write_text(json.dumps(bounds, indent=2) + "\n")

    with open(OUT / "SYN" / "regions.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["region_id", "area_km2", "population", "mean_luminosity_dn", "settlement_class",
                    "coverage_4g", "has_core_node"])
        for r in regions:
            cov = {"urban": 0.95, "suburban": 0.7, "rural": 0.35}[r.settlement_class]
            w.writerow([r.region_id, f"{r.area:g}", r.population, luminosity(r.pop_density),
                        r.settlement_class, cov, int(r.region_id == densest)])

    # one trunk through the main town, one spur toward the second
    x0, y0 = grid.cell_center(6, 0)
    x1, y1 = grid.cell_center(6, NCOLS - 1)
    xs, ys = grid.cell_center(6, 30)
    xe, ye = grid.cell_center(16, 30)
    fiber = [[x0, y0, x1, y1], [xs, ys, xe, ye]]
    (OUT / "SYN" / "fiber_existing.json").write_text(json.dumps(fiber) + "\n")

    table1 = [
        # iso3, cluster, income, 4G coverage, density, pop (m), gdp pc
        ("MWI", 1, "low", 16, 192, 18.1, 389),
        ("UGA", 1, "low", 31, 213, 42.7, 643),
        ("SEN", 2, "lower-middle", 50, 82, 15.9, 1522),
        ("KEN", 2, "lower-middle", 61, 90, 51.4, 1711),
        ("PAK", 3, "lower-middle", 67, 275, 212.2, 1473),
        ("ALB", 4, "upper-middle", 96, 105, 2.9, 5254),
        ("PER", 5, "upper-middle", 84, 25, 32.0, 6947),
        ("MEX", 6, "upper-middle", 85, 65, 126.2, 9698),
    ]
    with open(OUT / "roster.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iso3", "cluster_id", "population", "gdp_annual_usd", "income_group"])
        for iso, cl, inc, _, _, pop_m, gdp in table1:
            pop = round(pop_m * 1e6)
            w.writerow([iso, cl, pop, round(pop * gdp), inc])
        w.writerow(["SYN", 2, total, round(total * ctx.gdp_per_capita), ctx.income_group])

    frng = np.random.default_rng(7)
    with open(OUT / "features.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iso3", "gdp_pc", "pop_density", "coverage_4g"])
        for iso, _, _, cov, dens, _, gdp in table1:
            w.writerow([iso, gdp, dens, cov])
        for i in range(24):
            iso, _, _, cov, dens, _, gdp = table1[i % len(table1)]
            j = frng.lognormal(0.0, 0.2, 3)
            w.writerow([f"X{i:02d}", round(gdp * j[0]), round(dens * j[1], 1), round(min(99.0, cov * j[2]), 1)])

    run = {
        "countries": ["SYN"],
        "scenarios": ["S1", "S2", "S3"],
        "strategies": [
            {"technology": t, "sharing": s}
            for t in ("4G_W", "4G_F", "5G_NSA_W", "5G_SA_F")
            for s in ("baseline", "passive", "active", "srn")
        ],
        "seed": 42,
        "output_dir": "out",
        "lut": "lut.csv",
        "parallelism": 1,
        "roster": "roster.csv",
    }
    (OUT / "run.json").write_text(json.dumps(run, indent=2) + "\n")
    for r in regions:
        print(r.region_id, r.settlement_class, r.population, round(r.pop_density, 1))
    print("total", total, "towers", ctx.national_towers)


if __name__ == "__main__":
    main()
