"""Distance-based classifiers: supervised centroids and k-means."""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import ConfigError, DegenerateLabelsError
from .base import SCHEMA_VERSION, ProbClassifier, check_xy, softmax

__all__ = ["CentroidModel", "centroid_fit", "kmeans_fit", "distances", "default_temperature"]

METRICS = ("l1", "l2", "cosine")


def _unit_rows(a):
    n = np.linalg.norm(a, axis=1, keepdims=True)
    return np.divide(a, n, out=np.zeros_like(a), where=n > 0)


def distances(x, centroids, metric):
    """Row-by-centroid distance matrix. Cosine distance is ``1 - cos``;
    a zero vector has cosine 0 to everything."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    c = np.atleast_2d(centroids)
    if metric == "l1":
        return kernels.l1_distances(x, c)
    if metric == "l2":
        sq = (x * x).sum(1)[:, None] - 2.0 * x @ c.T + (c * c).sum(1)[None, :]
        return np.sqrt(np.maximum(sq, 0.0))
    if metric == "cosine":
        return 1.0 - _unit_rows(x) @ _unit_rows(c).T
    raise ConfigError(f"unknown metric {metric!r}")


def default_temperature(centroids, metric):
    """Median pairwise centroid distance over four (1.0 if degenerate)."""
    d = distances(centroids, centroids, metric)
    iu = np.triu_indices(d.shape[0], 1)
    med = float(np.median(d[iu])) if iu[0].size else 0.0
    return med / 4.0 if med > 0 else 1.0


@dataclass(eq=False)
class CentroidModel(ProbClassifier):
    centroids: np.ndarray
    metric: str = "l2"
    temperature: float = 1.0

    kind = "centroid"

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}")
        if not self.temperature > 0:
            raise ConfigError("temperature must be positive")
        if not np.all(np.isfinite(self.centroids)):
            raise ConfigError("centroids must be finite")

    @property
    def n_classes(self):
        return self.centroids.shape[0]

    @property
    def n_features(self):
        return self.centroids.shape[1]

    @property
    def n_parameters(self):
        return int(self.centroids.size)

    def distances(self, x):
        x, _ = self._check_input(x)
        return distances(x, self.centroids, self.metric)

    def nearest(self, x):
        return np.argmin(self.distances(x), axis=1)

    def _proba(self, x):
        return softmax(-distances(x, self.centroids, self.metric) / self.temperature)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "centroids": self.centroids.tolist(),
            "metric": self.metric,
            "temperature": self.temperature,
        }

    @classmethod
    def from_dict(cls, d):
        c = np.asarray(d["centroids"], dtype=np.float64)
        return cls(np.atleast_2d(c), d["metric"], float(d["temperature"]))


def centroid_fit(x, labels, metric="l2", temperature=None, n_classes=None):
    """Per-class mean (l2, cosine) or coordinate-wise median (l1)."""
    if metric not in METRICS:
        raise ConfigError(f"unknown metric {metric!r}")
    x, labels, k = check_xy(x, labels, n_classes, min_distinct=1)
    counts = np.bincount(labels, minlength=k)
    if np.any(counts == 0):
        raise DegenerateLabelsError(f"empty class(es): {np.flatnonzero(counts == 0).tolist()}")
    reduce = np.median if metric == "l1" else np.mean
    cents = np.stack([reduce(x[labels == c], axis=0) for c in range(k)])
    if temperature is None:
        temperature = default_temperature(cents, metric)
    return CentroidModel(cents, metric, float(temperature))


def _assign_cost(x, cents, metric):
    d = distances(x, cents, metric)
    return d**2 if metric == "l2" else d


def kmeans_fit(x, k, metric="l2", seed=0, max_iter=300, temperature=None):
    """Lloyd iterations from k-means++ seeds.

    Centres update to the cluster mean (median for l1). An empty cluster is
    re-seeded at the point farthest from its current centre.
    """
    if k < 2:
        raise ConfigError("k must be >= 2")
    if metric not in METRICS:
        raise ConfigError(f"unknown metric {metric!r}")
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n = x.shape[0]
    if n < k:
        raise ConfigError("fewer points than clusters")
    rng = np.random.default_rng(seed)

    cents = np.empty((k, x.shape[1]))
    cents[0] = x[rng.integers(n)]
    best = _assign_cost(x, cents[:1], metric)[:, 0]
    for j in range(1, k):
        total = best.sum()
        idx = rng.choice(n, p=best / total) if total > 0 else rng.integers(n)
        cents[j] = x[idx]
        best = np.minimum(best, _assign_cost(x, cents[j : j + 1], metric)[:, 0])

    reduce = np.median if metric == "l1" else np.mean
    assign = None
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d = _assign_cost(x, cents, metric)
        new = np.argmin(d, axis=1)
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        own = d[np.arange(n), assign]
        for j in range(k):
            members = assign == j
            if members.any():
                cents[j] = reduce(x[members], axis=0)
            else:
                far = int(np.argmax(own))
                cents[j] = x[far]
                own[far] = -np.inf
    if temperature is None:
        temperature = default_temperature(cents, metric)
    model = CentroidModel(cents, metric, float(temperature))
    model.n_iter = n_iter
    return model
