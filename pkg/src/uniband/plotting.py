"""Figures and summary tables for a finished run directory."""
from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .costs import COST_FIELDS  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}

# stacked in this order; transfers (spectrum, tax) sit on top of resource costs
STACK = ("network", "administration", "profit", "subsidy", "spectrum", "tax")


def _fig(width=6.0, ratio=0.62):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(width, width * ratio))
    return fig, ax


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def collect_national(run_dir) -> list[dict]:
    """NATIONAL rows from every decomposition.csv under ``run_dir``."""
    rows = []
    for f in sorted(Path(run_dir).glob("*/*/*/decomposition.csv")):
        with open(f, newline="") as fh:
            for row in csv.DictReader(fh):
                if row["region_id"] == "NATIONAL":
                    rows.append({**row, **{k: float(row[k]) for k in COST_FIELDS}})
    return rows


def write_summary(rows, path) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["country", "scenario", "strategy", *COST_FIELDS])
        for r in rows:
            w.writerow([r["country"], r["scenario"], r["strategy"], *(repr(r[k]) for k in COST_FIELDS)])
    return Path(path)


def plot_social_cost(rows, path, country=None) -> Path:
    """Grouped bars: social cost per strategy, one bar per scenario."""
    rows = [r for r in rows if country is None or r["country"] == country]
    scenarios = sorted({r["scenario"] for r in rows})
    strategies = sorted({r["strategy"] for r in rows})
    value = {(r["scenario"], r["strategy"]): r["social"] for r in rows}
    fig, ax = _fig(max(6.0, 0.6 * len(strategies) + 2))
    width = 0.8 / max(1, len(scenarios))
    x = np.arange(len(strategies))
    for i, sc in enumerate(scenarios):
        ys = [value.get((sc, st), np.nan) / 1e9 for st in strategies]
        ax.bar(x + i * width - 0.4 + width / 2, ys, width, label=sc)
    ax.set_xticks(x)
    ax.set_xticklabels(strategies, rotation=45, ha="right")
    ax.set_ylabel("Social cost (USD bn, NPV)")
    if country:
        ax.set_title(country)
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_decomposition(rows, path, country=None, scenario=None) -> Path:
    """Stacked cost lines per strategy; negative government lines are not drawn."""
    rows = [
        r for r in rows
        if (country is None or r["country"] == country) and (scenario is None or r["scenario"] == scenario)
    ]
    rows = sorted(rows, key=lambda r: r["strategy"])
    fig, ax = _fig(max(6.0, 0.6 * len(rows) + 2))
    x = np.arange(len(rows))
    bottom = np.zeros(len(rows))
    for part in STACK:
        ys = np.array([r[part] for r in rows]) / 1e9
        ax.bar(x, ys, 0.7, bottom=bottom, label=part)
        bottom += ys
    ax.set_xticks(x)
    ax.set_xticklabels([r["strategy"] for r in rows], rotation=45, ha="right")
    ax.set_ylabel("USD bn (NPV)")
    title = " / ".join(t for t in (country, scenario) if t)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, ncol=3)
    return _save(fig, path)


def plot_wss(curve, path) -> Path:
    """Elbow plot from ``[(k, wss), ...]``."""
    ks, wss = zip(*curve)
    fig, ax = _fig(4.5, 0.7)
    ax.plot(ks, wss, "o-", color="k", lw=1)
    ax.set_xlabel("k")
    ax.set_ylabel("Within-cluster sum of squares")
    ax.set_xticks(ks)
    return _save(fig, path)


def render_report(run_dir, out_dir=None) -> list[Path]:
    """Summary CSV plus figures per country and scenario; returns written paths."""
    run_dir = Path(run_dir)
    out = Path(out_dir) if out_dir else run_dir / "report"
    out.mkdir(parents=True, exist_ok=True)
    rows = collect_national(run_dir)
    if not rows:
        raise FileNotFoundError(f"no decomposition.csv files under {run_dir}")
    written = [write_summary(rows, out / "national_summary.csv")]
    for c in sorted({r["country"] for r in rows}):
        written.append(plot_social_cost(rows, out / f"{c}_social_cost.png", c))
        for sc in sorted({r["scenario"] for r in rows if r["country"] == c}):
            written.append(plot_decomposition(rows, out / f"{c}_{sc}_decomposition.png", c, sc))
    return written
