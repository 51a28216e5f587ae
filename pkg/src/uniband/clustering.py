"""K-means grouping of countries on income, density and 4G coverage features.

Lloyd iterations with k-means++ seeding; the best of several restarts is
kept. Features are z-scored with the sample (n - 1) standard deviation.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

FEATURES = ("gdp_per_capita", "pop_density", "coverage_4g")


@dataclass(frozen=True)
class CountryFeatures:
    iso3: str
    gdp_per_capita: float
    pop_density: float
    coverage_4g: float

    def vector(self) -> np.ndarray:
        return np.array([self.gdp_per_capita, self.pop_density, self.coverage_4g], dtype=float)


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray  # standardized space
    mean: np.ndarray
    std: np.ndarray
    labels: np.ndarray
    wss: float
    iso3: list[str] = field(default_factory=list)
    wss_history: list[float] = field(default_factory=list)  # best restart
    restart_histories: list[list[float]] = field(default_factory=list)

    @property
    def assignments(self) -> dict[str, int]:
        return {c: int(l) for c, l in zip(self.iso3, self.labels)}


def standardize(features, names=FEATURES):
    """Column z-scores. Accepts CountryFeatures records or a 2-D array."""
    if len(features) and isinstance(features[0], CountryFeatures):
        x = np.array([f.vector() for f in features])
    else:
        x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise ValueError("standardization needs at least 2 rows")
    mean = x.mean(axis=0)
    std = x.std(axis=0, ddof=1)
    for j, s in enumerate(std):
        if not s > 0:
            name = names[j] if j < len(names) else f"column {j}"
            raise ValueError(f"feature {name!r} has zero variance")
    return (x - mean) / std, mean, std


def _wss(points, centroids, labels):
    return float(((points - centroids[labels]) ** 2).sum())


def _assign(points, centroids):
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    # argmin keeps the lowest index on ties
    return d2.argmin(axis=1)


def _kmeanspp(points, k, rng):
    n = len(points)
    centers = [points[rng.integers(n)]]
    for _ in range(1, k):
        d2 = ((points[:, None, :] - np.array(centers)[None]) ** 2).sum(axis=2).min(axis=1)
        total = d2.sum()
        if total == 0:
            # all remaining mass sits on chosen centers
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centers.append(points[idx])
    return np.array(centers, dtype=float)


def lloyd(points, init, max_iter=100):
    """Plain Lloyd iterations. Returns (centroids, labels, per-iteration wss)."""
    centroids = np.array(init, dtype=float)
    labels = _assign(points, centroids)
    history = [_wss(points, centroids, labels)]
    for _ in range(max_iter):
        for j in range(len(centroids)):
            members = points[labels == j]
            if len(members):
                centroids[j] = members.mean(axis=0)
        history.append(_wss(points, centroids, labels))
        new = _assign(points, centroids)
        if np.array_equal(new, labels):
            break
        labels = new
        history.append(_wss(points, centroids, labels))
    return centroids, labels, history


def kmeans(points, k, max_iter=100, seed=0, restarts=25) -> ClusterModel:
    points = np.asarray(points, dtype=float)
    n_distinct = len(np.unique(points, axis=0))
    if not 1 <= k <= n_distinct:
        raise ValueError(f"k={k} needs 1 <= k <= {n_distinct} distinct points")
    seq = np.random.SeedSequence(seed)
    best = None
    histories = []
    for child in seq.spawn(restarts):
        rng = np.random.default_rng(child)
        centroids, labels, history = lloyd(points, _kmeanspp(points, k, rng), max_iter)
        histories.append(history)
        wss = history[-1]
        # strict < keeps the lowest restart index on ties
        if best is None or wss < best[2]:
            best = (centroids, labels, wss, history)
    centroids, labels, wss, history = best
    return ClusterModel(
        k=k,
        centroids=centroids,
        mean=np.zeros(points.shape[1]),
        std=np.ones(points.shape[1]),
        labels=labels,
        wss=wss,
        wss_history=history,
        restart_histories=histories,
    )


def fit_countries(features: list[CountryFeatures], k=6, seed=0, max_iter=100, restarts=25) -> ClusterModel:
    z, mean, std = standardize(features)
    model = kmeans(z, k, max_iter=max_iter, seed=seed, restarts=restarts)
    model.mean, model.std = mean, std
    model.iso3 = [f.iso3 for f in features]
    return model


def wss_curve(points, k_max, seed=0, max_iter=100, restarts=25):
    """(k, wss) for k = 1..k_max, non-increasing in k.

    Restarts make decreases very likely but not guaranteed. Splitting one
    point off any (k-1)-partition never raises WSS, so the previous value is
    always attainable at k and is reported when the search comes back worse.
    """
    points = np.asarray(points, dtype=float)
    out = []
    prev = None
    for k in range(1, k_max + 1):
        model = kmeans(points, k, max_iter=max_iter, seed=seed, restarts=restarts)
        wss = model.wss
        if prev is not None and wss > prev:
            wss = prev
        out.append((k, wss))
        prev = wss
    return out


def assign_cluster(features, model: ClusterModel) -> int:
    if isinstance(features, CountryFeatures):
        x = (features.vector() - model.mean) / model.std
    else:
        x = np.asarray(features, dtype=float)
    d2 = ((model.centroids - x) ** 2).sum(axis=1)
    return int(np.argmin(d2))


def load_features(path) -> list[CountryFeatures]:
    with open(path, newline="") as fh:
        return [
            CountryFeatures(
                row["iso3"],
                float(row["gdp_pc"]),
                float(row["pop_density"]),
                float(row["coverage_4g"]),
            )
            for row in csv.DictReader(fh)
        ]


def write_clusters(model: ClusterModel, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iso3", "cluster_id"])
        for iso3, label in sorted(model.assignments.items()):
            w.writerow([iso3, label])
