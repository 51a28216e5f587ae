"""Stochastic link-budget simulation and capacity lookup tables.

Receivers are dropped uniformly in a hexagonal serving cell with one tier of
six co-channel interferers. Every receiver owns a Philox stream keyed by
(seed, frequency, receiver index), so a table built serially or across any
number of workers comes out bit-identical.
"""
from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
THERMAL_NOISE_DBM_HZ = -174.0

DEFAULT_FREQUENCIES = (700, 800, 850, 1700, 1800, 1900, 2500, 2600, 3500)
DEFAULT_DENSITIES = (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
MIMO_GAIN = {"4G": 2.0, "5G": 2.6}


@dataclass(frozen=True)
class ClutterModel:
    exponent_los: float = 2.2
    exponent_nlos: float = 3.5
    shadow_sigma_los: float = 4.0
    shadow_sigma_nlos: float = 8.0


@dataclass(frozen=True)
class RadioParams:
    samples_per_receiver: int = 20
    receivers: int = 50
    tx_power: float = 40.0  # dBm
    tx_antenna_gain: float = 16.0  # dBi
    sectors: int = 3
    tx_height: float = 30.0  # m
    ue_gain: float = 0.0
    ue_losses: float = 4.0
    ue_misc_losses: float = 4.0
    ue_height: float = 1.5
    network_load: float = 0.5
    frequency_reuse: int = 1
    los_cutoff: float = 500.0  # m, serving link
    interferer_los: bool = False  # apply the cutoff to interfering links too
    indoor_probability: float = 0.5
    penetration_mu: float = 12.0  # dB
    penetration_sigma: float = 8.0
    noise_figure: float = 7.0
    noise_bandwidth: float = 10.0  # MHz
    include_noise: bool = True
    clutter: dict = field(
        default_factory=lambda: {"urban": ClutterModel(), "rural": ClutterModel()}
    )

    def model_for(self, settlement_class: str) -> ClutterModel:
        # suburban areas use the urban-macro form
        return self.clutter["rural" if settlement_class == "rural" else "urban"]

    def noise_dbm(self) -> float:
        if not self.include_noise:
            return -math.inf
        return THERMAL_NOISE_DBM_HZ + 10 * math.log10(self.noise_bandwidth * 1e6) + self.noise_figure


# -- propagation ------------------------------------------------------------

def median_path_loss(frequency, distance_2d, los, settlement_class="urban", params=None):
    """Log-distance loss referenced to free space at 1 m (dB)."""
    params = params or RadioParams()
    model = params.model_for(settlement_class)
    d2 = np.maximum(np.asarray(distance_2d, dtype=float), 10.0)
    d3 = np.sqrt(d2**2 + (params.tx_height - params.ue_height) ** 2)
    fspl_1m = 20 * np.log10(4 * np.pi * frequency * 1e6 / SPEED_OF_LIGHT)
    n = np.where(los, model.exponent_los, model.exponent_nlos)
    return fspl_1m + 10 * n * np.log10(d3)


def path_loss(frequency, distance_2d, los, settlement_class="urban", params=None, rng=None):
    """Median loss plus a zero-mean normal shadowing term in dB."""
    params = params or RadioParams()
    model = params.model_for(settlement_class)
    median = median_path_loss(frequency, distance_2d, los, settlement_class, params)
    sigma = np.where(los, model.shadow_sigma_los, model.shadow_sigma_nlos)
    if rng is None or not np.any(sigma):
        return median
    return median + rng.normal(0.0, 1.0, np.shape(median)) * sigma


# -- geometry ---------------------------------------------------------------

def cell_radius(site_density):
    """Circumradius (m) of the hexagon whose area is 1 / density km2."""
    return 1000.0 * math.sqrt(2.0 / (3.0 * math.sqrt(3.0) * site_density))


def interferer_positions(site_density):
    isd = math.sqrt(3.0) * cell_radius(site_density)
    angles = np.deg2rad(30.0 + 60.0 * np.arange(6))
    return np.column_stack([isd * np.cos(angles), isd * np.sin(angles)])


def _in_hexagon(x, y, r):
    # flat-top hexagon with vertices on the x axis
    ax, ay = abs(x), abs(y)
    return ay <= r * math.sqrt(3) / 2 and math.sqrt(3) * ax + ay <= math.sqrt(3) * r


def _receiver_rng(seed, frequency, index):
    # density is left out of the key on purpose: every density sees the same
    # receivers (scaled to the cell) and the same fading draws
    key = (int(round(frequency * 1000)), index)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass
class SinrSamples:
    signal_dbm: np.ndarray
    interference_dbm: np.ndarray
    noise_dbm: float
    sinr_db: np.ndarray
    distance_m: np.ndarray  # serving distance per sample


def _dbm_to_mw(x):
    return np.power(10.0, np.asarray(x) / 10.0)


def _receiver_draws(rng, pos, frequency, interferers, settlement_class, params):
    n = params.samples_per_receiver
    los_cut = params.los_cutoff
    d_serv = float(np.hypot(*pos))
    pl_s = path_loss(frequency, np.full(n, d_serv), d_serv < los_cut, settlement_class, params, rng)
    d_int = np.hypot(interferers[:, 0] - pos[0], interferers[:, 1] - pos[1])
    d_int = np.broadcast_to(d_int, (n, len(d_int)))
    los_i = (d_int < los_cut) if params.interferer_los else np.zeros(d_int.shape, bool)
    pl_i = path_loss(frequency, d_int, los_i, settlement_class, params, rng)
    indoor = rng.random() < params.indoor_probability
    pen = np.maximum(rng.normal(params.penetration_mu, params.penetration_sigma, n), 0.0)
    if not indoor:
        pen = np.zeros(n)
    gains = params.tx_power + params.tx_antenna_gain + params.ue_gain - params.ue_losses - params.ue_misc_losses
    signal = gains - pl_s - pen
    interf = gains - pl_i - pen[:, None]
    return signal, interf, np.full(n, d_serv)


def _combine(signal, interf_list, noise_dbm, load):
    if interf_list.shape[1]:
        i_mw = _dbm_to_mw(interf_list).sum(axis=1)
    else:
        i_mw = np.zeros(len(signal))
    with np.errstate(divide="ignore"):
        i_dbm = 10 * np.log10(i_mw)
        denom = i_mw * load + _dbm_to_mw(noise_dbm)
        sinr = signal - 10 * np.log10(denom)
    return i_dbm, sinr


def simulate_sinr(site_density, frequency, params=None, seed=0, settlement_class="urban", interferers=True):
    """SINR samples for receivers spread over the serving hexagon."""
    if site_density <= 0:
        raise ValueError("site density must be positive")
    params = params or RadioParams()
    r = cell_radius(site_density)
    tier = interferer_positions(site_density) if interferers else np.empty((0, 2))
    sig, intf, dist = [], [], []
    for i in range(params.receivers):
        rng = _receiver_rng(seed, frequency, i)
        while True:
            x, y = rng.uniform(-1.0, 1.0, 2)
            if _in_hexagon(x, y, 1.0):
                break
        s, it, d = _receiver_draws(rng, (x * r, y * r), frequency, tier, settlement_class, params)
        sig.append(s)
        intf.append(it)
        dist.append(d)
    signal = np.concatenate(sig)
    interf = np.concatenate(intf)
    noise = params.noise_dbm()
    i_dbm, sinr = _combine(signal, interf, noise, params.network_load)
    return SinrSamples(signal, i_dbm, noise, sinr, np.concatenate(dist))


# -- spectral efficiency ----------------------------------------------------

@dataclass(frozen=True)
class SETable:
    technology: str
    sinr_min: tuple
    se: tuple
    mimo_multiplier: float = 1.0

    def __post_init__(self):
        if list(self.sinr_min) != sorted(self.sinr_min):
            raise ValueError("SE table rows must be sorted by SINR")
        if any(b < a for a, b in zip(self.se, self.se[1:])):
            raise ValueError("spectral efficiency must be non-decreasing in SINR")


def sinr_to_se(sinr, table: SETable) -> float:
    i = bisect.bisect_right(table.sinr_min, sinr) - 1
    if i < 0:
        return 0.0
    return table.se[i] * table.mimo_multiplier


def sinr_to_se_array(sinr, table: SETable) -> np.ndarray:
    idx = np.searchsorted(np.asarray(table.sinr_min), np.asarray(sinr), side="right") - 1
    se = np.concatenate([[0.0], np.asarray(table.se, dtype=float)])
    return se[idx + 1] * table.mimo_multiplier


def load_se_tables(path=None, mimo=None) -> dict[str, SETable]:
    mimo = MIMO_GAIN if mimo is None else mimo
    if path is None:
        text = resources.files("uniband.data").joinpath("se_tables.csv").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    rows: dict[str, list] = {}
    for row in csv.DictReader(text.splitlines()):
        rows.setdefault(row["technology"], []).append((float(row["sinr_min_db"]), float(row["se_bps_hz"])))
    return {
        tech: SETable(tech, tuple(r[0] for r in sorted(v)), tuple(r[1] for r in sorted(v)), mimo.get(tech, 1.0))
        for tech, v in rows.items()
    }


# -- lookup tables ----------------------------------------------------------

@dataclass
class CapacityLUT:
    """Mean per-cell spectral efficiency keyed by (technology, MHz, sites/km2)."""

    entries: dict = field(default_factory=dict)

    def densities(self, technology, frequency) -> list[float]:
        return sorted(d for (t, f, d) in self.entries if t == technology and f == frequency)

    def frequencies(self, technology) -> list[float]:
        return sorted({f for (t, f, _) in self.entries if t == technology})

    def se(self, technology, frequency, density) -> float:
        return self.entries[(technology, frequency, density)]

    def nearest_frequency(self, technology, frequency) -> float:
        freqs = self.frequencies(technology)
        if not freqs:
            raise KeyError(f"no LUT entries for {technology}")
        # equidistant ties resolve to the lower frequency
        return min(freqs, key=lambda f: (abs(f - frequency), f))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["technology", "freq_mhz", "density", "mean_se"])
            for (t, f, d), se in sorted(self.entries.items()):
                w.writerow([t, repr(float(f)), repr(float(d)), repr(float(se))])

    @classmethod
    def from_csv(cls, path) -> "CapacityLUT":
        entries = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                key = (row["technology"], float(row["freq_mhz"]), float(row["density"]))
                entries[key] = float(row["mean_se"])
        return cls(entries)


def _lut_cell(args):
    frequency, density, params, seed, tables = args
    samples = simulate_sinr(density, frequency, params, seed)
    return {tech: float(sinr_to_se_array(samples.sinr_db, t).mean()) for tech, t in tables.items()}


def build_capacity_lut(
    frequencies=DEFAULT_FREQUENCIES,
    densities=DEFAULT_DENSITIES,
    technologies=("4G", "5G"),
    params=None,
    se_tables=None,
    seed=0,
    jobs=1,
) -> CapacityLUT:
    if not frequencies or not densities or not technologies:
        raise ValueError("LUT axes must be non-empty")
    params = params or RadioParams()
    se_tables = se_tables or load_se_tables()
    tables = {t: se_tables[t] for t in technologies}
    work = [(float(f), float(d), params, seed, tables) for f in frequencies for d in sorted(densities)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_lut_cell, work))
    else:
        results = [_lut_cell(w) for w in work]
    entries = {}
    for (f, d, *_), res in zip(work, results):
        for tech, se in res.items():
            entries[(tech, f, d)] = se
    return CapacityLUT(entries)


def capacity_at_distance(
    distances,
    frequency=700.0,
    bandwidth=10.0,
    technology="4G",
    params=None,
    se_tables=None,
    seed=0,
    site_density=0.01,
):
    """Mean per-user downlink rate (Mbps) for receivers at fixed ranges.

    Receivers sit on a ring around the serving site at each distance with a
    random bearing; the interferer tier follows ``site_density``.
    """
    params = params or RadioParams()
    table = (se_tables or load_se_tables())[technology]
    tier = interferer_positions(site_density)
    noise = replace(params, noise_bandwidth=bandwidth).noise_dbm()
    out = []
    for dist in distances:
        rates = []
        for i in range(params.receivers):
            rng = _receiver_rng(seed, frequency, i)
            theta = rng.uniform(0, 2 * math.pi)
            pos = (dist * math.cos(theta), dist * math.sin(theta))
            s, it, _ = _receiver_draws(rng, pos, frequency, tier, "urban", params)
            _, sinr = _combine(s, it, noise, params.network_load)
            rates.append(sinr_to_se_array(sinr, table) * bandwidth)
        out.append(float(np.concatenate(rates).mean()))
    return out


def area_capacity(lut_se, cells_per_site, site_density, bands) -> float:
    """Downlink Mbps/km2 over a band set.

    ``lut_se`` is either one spectral efficiency for every band or a mapping
    from band frequency to its own value.
    """
    total = 0.0
    for band in bands:
        se = lut_se[band.frequency] if isinstance(lut_se, dict) else lut_se
        total += se * cells_per_site * site_density * band.downlink_bandwidth
    return total
