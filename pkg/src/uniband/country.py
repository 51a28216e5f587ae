"""Country inputs: population rasters and region tables plus national metadata.

Everything here is plain data plus loaders/validators; downstream modules
never touch files directly.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

INCOME_GROUPS = ("low", "lower-middle", "upper-middle")
SETTLEMENT_CLASSES = ("urban", "suburban", "rural")
BACKHAUL_CLASSES = ("fiber", "copper", "microwave", "satellite")
ARPU_TIERS = ("high", "medium", "low")

# people/km2; boundary values go to the denser class
DEFAULT_THRESHOLDS = {"urban": 1500.0, "suburban": 300.0}


class GridFormatError(ValueError):
    """Malformed ASCII grid."""


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class SpectrumBand:
    frequency: float  # MHz
    bandwidth: float  # MHz
    generation: str  # "4G" | "5G"
    role: str  # "coverage" | "capacity"
    price: float  # USD/MHz/pop
    duplex: str = "FDD"
    dl_fraction: float = 1.0

    @property
    def downlink_bandwidth(self) -> float:
        if self.duplex == "TDD":
            return self.bandwidth * self.dl_fraction
        return self.bandwidth

    def to_dict(self) -> dict:
        d = {
            "frequency": self.frequency,
            "bandwidth": self.bandwidth,
            "generation": self.generation,
            "role": self.role,
            "price": self.price,
            "duplex": self.duplex,
        }
        if self.duplex == "TDD":
            d["dl_fraction"] = self.dl_fraction
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumBand":
        return cls(
            frequency=d["frequency"],
            bandwidth=d["bandwidth"],
            generation=d["generation"],
            role=d["role"],
            price=d["price"],
            duplex=d.get("duplex", "FDD"),
            dl_fraction=d.get("dl_fraction", 1.0),
        )


@dataclass(frozen=True)
class CountryContext:
    iso3: str
    population_total: int
    gdp_per_capita: float
    income_group: str
    n_mnos: int
    penetration_2020: float
    penetration_growth: float
    smartphone_base_urban: float
    smartphone_base_rural: float
    smartphone_growth: float
    arpu_tiers: dict
    spectrum_portfolio: tuple
    coverage_4g: float
    coverage_2g: float
    national_towers: int
    backhaul_profile: dict

    def bands(self, generation: str | None = None) -> list[SpectrumBand]:
        if generation is None:
            return list(self.spectrum_portfolio)
        return [b for b in self.spectrum_portfolio if b.generation == generation]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spectrum_portfolio"] = [b.to_dict() for b in self.spectrum_portfolio]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CountryContext":
        d = dict(d)
        d["spectrum_portfolio"] = tuple(
            SpectrumBand.from_dict(b) for b in d["spectrum_portfolio"]
        )
        return cls(**d)


@dataclass(frozen=True)
class RegionProfile:
    region_id: str
    area: float  # km2
    population: int
    settlement_class: str
    mean_luminosity: float = 0.0  # DN/km2
    coverage_4g: float | None = None
    has_core_node: bool = False
    existing_sites: int = 0
    site_technology: dict = field(default_factory=lambda: {"legacy": 0, "4G": 0})
    backhaul_mix: dict = field(
        default_factory=lambda: {k: 0 for k in BACKHAUL_CLASSES}
    )

    @property
    def pop_density(self) -> float:
        return self.population / self.area


@dataclass(frozen=True)
class PopulationGrid:
    """Single-band raster. Row 0 is the northernmost row, as in ESRI ASCII."""

    xll: float
    yll: float
    cell_size: float  # km
    values: np.ndarray  # people per cell, nan where nodata
    nodata: float = -9999.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def cell_area(self) -> float:
        return self.cell_size * self.cell_size

    def total(self) -> float:
        return float(np.nansum(self.values))

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        nrows = self.values.shape[0]
        x = self.xll + (col + 0.5) * self.cell_size
        y = self.yll + (nrows - row - 0.5) * self.cell_size
        return x, y


# -- raster -----------------------------------------------------------------

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")
_HEADER_ALIASES = {"xllcenter": "xllcorner", "yllcenter": "yllcorner"}


def load_population_grid(path) -> PopulationGrid:
    lines = Path(path).read_text().splitlines()
    header = {}
    lineno = 0
    for lineno, line in enumerate(lines, start=1):
        parts = line.split()
        if not parts:
            continue
        key = parts[0].lower()
        key = _HEADER_ALIASES.get(key, key)
        if key not in _HEADER_KEYS:
            lineno -= 1
            break
        if len(parts) != 2:
            raise GridFormatError(f"line {lineno}: expected '<key> <value>', got {line!r}")
        try:
            header[key] = float(parts[1])
        except ValueError:
            raise GridFormatError(f"line {lineno}: bad header value {parts[1]!r}") from None
    else:
        lineno = len(lines)

    missing = [k for k in _HEADER_KEYS[:5] if k not in header]
    if missing:
        raise GridFormatError(f"line {lineno + 1}: header missing {', '.join(missing)}")
    ncols, nrows = int(header["ncols"]), int(header["nrows"])
    nodata = header.get("nodata_value", -9999.0)

    rows = []
    for i, line in enumerate(lines[lineno:], start=lineno + 1):
        if not line.strip():
            continue
        try:
            row = [float(v) for v in line.split()]
        except ValueError:
            raise GridFormatError(f"line {i}: non-numeric value") from None
        if len(row) != ncols:
            raise GridFormatError(f"line {i}: expected {ncols} values, got {len(row)}")
        rows.append(row)
    if len(rows) != nrows:
        raise GridFormatError(f"expected {nrows} data rows, got {len(rows)}")

    values = np.array(rows, dtype=float).reshape(nrows, ncols)
    mask = values == nodata
    if np.any(values[~mask] < 0):
        r, c = np.argwhere((values < 0) & ~mask)[0]
        raise ValidationError(f"negative population at row {r}, col {c}")
    values[mask] = np.nan
    return PopulationGrid(header["xllcorner"], header["yllcorner"], header["cellsize"], values, nodata)


def write_population_grid(grid: PopulationGrid, path) -> None:
    nrows, ncols = grid.shape
    out = [
        f"ncols {ncols}",
        f"nrows {nrows}",
        f"xllcorner {grid.xll:g}",
        f"yllcorner {grid.yll:g}",
        f"cellsize {grid.cell_size:g}",
        f"NODATA_value {grid.nodata:g}",
    ]
    for row in grid.values:
        out.append(" ".join(f"{grid.nodata:g}" if math.isnan(v) else f"{v:g}" for v in row))
    Path(path).write_text("\n".join(out) + "\n")


# -- regions ----------------------------------------------------------------

def rasterize_masks(shape: tuple[int, int], boundaries: dict) -> np.ndarray:
    """Label array from axis-aligned cell-index rectangles.

    ``boundaries`` maps region_id -> list of ``[row0, row1, col0, col1]``
    half-open rectangles. Returns an int array of region indices (sorted
    region_id order), -1 where no region claims the cell.
    """
    labels = np.full(shape, -1, dtype=int)
    for idx, rid in enumerate(sorted(boundaries)):
        for r0, r1, c0, c1 in boundaries[rid]:
            block = labels[r0:r1, c0:c1]
            clash = (block != -1) & (block != idx)
            if clash.any():
                raise ValidationError(f"region {rid!r} overlaps another region")
            block[...] = idx
    return labels


def _fill_unclaimed(labels: np.ndarray) -> np.ndarray:
    free = np.argwhere(labels == -1)
    if len(free) == 0:
        return labels
    claimed = np.argwhere(labels != -1)
    if len(claimed) == 0:
        raise ValidationError("no cell is covered by any region")
    logger.warning("%d grid cells fall outside every region; using nearest region", len(free))
    out = labels.copy()
    for r, c in free:
        d2 = (claimed[:, 0] - r) ** 2 + (claimed[:, 1] - c) ** 2
        # argmin takes the first minimum, i.e. row-major order among ties
        nr, nc = claimed[int(np.argmin(d2))]
        out[r, c] = labels[nr, nc]
    return out


def regionalize(grid: PopulationGrid, boundaries: dict, thresholds: dict | None = None) -> list[RegionProfile]:
    """Zonal population sums over rectangle-mask regions."""
    labels = _fill_unclaimed(rasterize_masks(grid.shape, boundaries))
    counts = np.nan_to_num(grid.values, nan=0.0)
    regions = []
    for idx, rid in enumerate(sorted(boundaries)):
        sel = labels == idx
        n_cells = int(sel.sum())
        if n_cells == 0:
            raise ValidationError(f"region {rid!r} covers no cells")
        pop = counts[sel].sum()
        area = n_cells * grid.cell_area
        population = int(round(pop))
        regions.append(
            RegionProfile(
                region_id=rid,
                area=area,
                population=population,
                settlement_class=classify_settlement(population / area, thresholds),
            )
        )
    return regions


def region_labels(grid: PopulationGrid, boundaries: dict) -> tuple[np.ndarray, list[str]]:
    return _fill_unclaimed(rasterize_masks(grid.shape, boundaries)), sorted(boundaries)


def classify_settlement(pop_density: float, thresholds: dict | None = None) -> str:
    t = thresholds or DEFAULT_THRESHOLDS
    if not t["urban"] > t["suburban"] > 0:
        raise ValueError("settlement thresholds must satisfy urban > suburban > 0")
    if pop_density >= t["urban"]:
        return "urban"
    if pop_density >= t["suburban"]:
        return "suburban"
    return "rural"


# -- validation -------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


def _check_fraction(report, name, value):
    if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
        report.append(Violation(name, f"must be a fraction in [0, 1], got {value!r}"))


def validate_country(ctx: CountryContext) -> list[Violation]:
    """Every violated invariant, empty when the context is sound."""
    report: list[Violation] = []
    for name in (
        "penetration_2020",
        "smartphone_base_urban",
        "smartphone_base_rural",
        "coverage_4g",
        "coverage_2g",
    ):
        _check_fraction(report, name, getattr(ctx, name))
    if ctx.coverage_2g == 0:
        report.append(Violation("coverage_2g", "must be positive"))
    if ctx.n_mnos < 1:
        report.append(Violation("n_mnos", f"need at least one network, got {ctx.n_mnos}"))
    if ctx.population_total <= 0:
        report.append(Violation("population_total", "must be positive"))
    if ctx.national_towers < 0:
        report.append(Violation("national_towers", "must be non-negative"))
    if ctx.income_group not in INCOME_GROUPS:
        report.append(Violation("income_group", f"unknown income group {ctx.income_group!r}"))

    bp = ctx.backhaul_profile
    if set(bp) != set(BACKHAUL_CLASSES):
        report.append(Violation("backhaul_profile", f"keys must be {BACKHAUL_CLASSES}"))
    elif any(not 0 <= v <= 1 for v in bp.values()) or abs(sum(bp.values()) - 1.0) > 1e-9:
        report.append(Violation("backhaul_profile", f"fractions must sum to 1, got {sum(bp.values())!r}"))

    tiers = ctx.arpu_tiers
    if set(tiers) != set(ARPU_TIERS):
        report.append(Violation("arpu_tiers", f"keys must be {ARPU_TIERS}"))
    elif not tiers["high"] >= tiers["medium"] >= tiers["low"] >= 0:
        report.append(Violation("arpu_tiers", "need high >= medium >= low >= 0"))

    for i, band in enumerate(ctx.spectrum_portfolio):
        name = f"spectrum_portfolio[{i}]"
        if band.bandwidth <= 0:
            report.append(Violation(name, "bandwidth must be positive"))
        if band.price < 0:
            report.append(Violation(name, "price must be non-negative"))
        if band.generation not in ("4G", "5G"):
            report.append(Violation(name, f"unknown generation {band.generation!r}"))
        if band.role not in ("coverage", "capacity"):
            report.append(Violation(name, f"unknown role {band.role!r}"))
        if band.duplex == "TDD" and not 0 < band.dl_fraction < 1:
            report.append(Violation(name, "TDD dl_fraction must lie in (0, 1)"))
        elif band.duplex not in ("FDD", "TDD"):
            report.append(Violation(name, f"unknown duplex {band.duplex!r}"))
    return report


def validate_regions(regions: list[RegionProfile]) -> list[Violation]:
    report = []
    seen = set()
    for r in regions:
        name = f"region {r.region_id}"
        if r.region_id in seen:
            report.append(Violation(name, "duplicate region_id"))
        seen.add(r.region_id)
        if not r.area > 0:
            report.append(Violation(name, "area must be positive"))
        if r.population < 0:
            report.append(Violation(name, "population must be non-negative"))
        if r.settlement_class not in SETTLEMENT_CLASSES:
            report.append(Violation(name, f"unknown settlement class {r.settlement_class!r}"))
        if sum(r.site_technology.values()) != r.existing_sites:
            report.append(Violation(name, "site_technology counts must sum to existing_sites"))
    return report


# -- file I/O ---------------------------------------------------------------

def dumps_country(ctx: CountryContext) -> str:
    return json.dumps(ctx.to_dict(), indent=2) + "\n"


def load_country(path) -> CountryContext:
    return CountryContext.from_dict(json.loads(Path(path).read_text()))


def load_regions(path, thresholds: dict | None = None) -> list[RegionProfile]:
    """Read ``regions.csv``; settlement class is derived when the column is blank."""
    regions = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            area = float(row["area_km2"])
            pop = int(round(float(row["population"])))
            cls = (row.get("settlement_class") or "").strip()
            if not cls:
                cls = classify_settlement(pop / area if area > 0 else 0.0, thresholds)
            cov = (row.get("coverage_4g") or "").strip()
            core = (row.get("has_core_node") or "").strip().lower()
            regions.append(
                RegionProfile(
                    region_id=row["region_id"],
                    area=area,
                    population=pop,
                    settlement_class=cls,
                    mean_luminosity=float(row.get("mean_luminosity_dn") or 0.0),
                    coverage_4g=float(cov) if cov else None,
                    has_core_node=core in ("1", "true", "yes"),
                )
            )
    return regions


@dataclass
class CountryBundle:
    """Everything the pipeline reads for one country directory."""

    context: CountryContext
    regions: list[RegionProfile]
    grid: PopulationGrid | None = None
    boundaries: dict | None = None
    fiber_existing: list | None = None
    path: Path | None = None


def load_country_dir(path, thresholds: dict | None = None) -> CountryBundle:
    """Load ``country.json``, ``regions.csv`` and optional geodata from a directory.

    Optional files: ``popgrid.asc``, ``boundaries.json`` (rectangle masks) and
    ``fiber_existing.json`` (segments ``[x1, y1, x2, y2]`` in km).
    """
    path = Path(path)
    ctx = load_country(path / "country.json")
    regions = load_regions(path / "regions.csv", thresholds)
    bundle = CountryBundle(ctx, regions, path=path)
    if (path / "popgrid.asc").exists():
        bundle.grid = load_population_grid(path / "popgrid.asc")
    if (path / "boundaries.json").exists():
        bundle.boundaries = json.loads((path / "boundaries.json").read_text())
    if (path / "fiber_existing.json").exists():
        bundle.fiber_existing = json.loads((path / "fiber_existing.json").read_text())
    return bundle


def with_assets(region: RegionProfile, **changes) -> RegionProfile:
    return replace(region, **changes)
