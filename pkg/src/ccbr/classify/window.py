"""Window discrimination: one axis-aligned box per class."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from .base import SCHEMA_VERSION, ProbClassifier, check_xy
from .centroid import CentroidModel, centroid_fit

__all__ = ["WindowModel", "window_fit"]


@dataclass(eq=False)
class WindowModel(ProbClassifier):
    low: np.ndarray  # n_classes × n_features
    high: np.ndarray
    fallback: CentroidModel

    kind = "window"

    def __post_init__(self):
        if self.low.shape != self.high.shape or np.any(self.low > self.high):
            raise ConfigError("window bounds must satisfy low <= high")

    @property
    def n_classes(self):
        return self.low.shape[0]

    @property
    def n_features(self):
        return self.low.shape[1]

    @property
    def n_parameters(self):
        return int(self.low.size + self.high.size)

    def contains(self, x):
        x, _ = self._check_input(x)
        return np.all((x[:, None, :] >= self.low) & (x[:, None, :] <= self.high), axis=2)

    def _proba(self, x):
        inside = self.contains(x)
        hits = inside.sum(axis=1)
        p = self.fallback._proba(x)
        one = hits == 1
        p[one] = inside[one].astype(np.float64)
        return p

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "low": self.low.tolist(),
            "high": self.high.tolist(),
            "fallback": self.fallback.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.atleast_2d(np.asarray(d["low"], dtype=np.float64)),
            np.atleast_2d(np.asarray(d["high"], dtype=np.float64)),
            CentroidModel.from_dict(d["fallback"]),
        )


def window_fit(x, labels, coverage=0.95, n_classes=None, fallback_metric="l2"):
    """Per class and feature, bounds at the central ``coverage`` quantiles.

    Points inside exactly one window get a one-hot vector; all others are
    scored by a nearest-centroid fallback fitted on the same data.
    """
    if not 0.5 < coverage <= 1.0:
        raise ConfigError("coverage must lie in (0.5, 1]")
    fallback = centroid_fit(x, labels, fallback_metric, n_classes=n_classes)
    x, labels, k = check_xy(x, labels, fallback.n_classes, min_distinct=1)
    q = (1.0 - coverage) / 2.0
    low = np.stack([np.quantile(x[labels == c], q, axis=0) for c in range(k)])
    high = np.stack([np.quantile(x[labels == c], 1.0 - q, axis=0) for c in range(k)])
    return WindowModel(low, high, fallback)
