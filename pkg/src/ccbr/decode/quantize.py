"""Scalar quantization of kinematic targets ("kinematic quanta")."""

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DegenerateTargetError, ShapeError

__all__ = ["QuantizerModel", "quantizer_fit", "quantizer_encode", "quantizer_decode_expect"]


@dataclass(frozen=True, eq=False)
class QuantizerModel:
    edges: np.ndarray  # QL-1 interior boundaries, ascending
    centers: np.ndarray  # QL bin representatives
    input_range: tuple

    def __post_init__(self):
        if self.centers.size < 2 or self.edges.size != self.centers.size - 1:
            raise ConfigError("quantizer needs QL >= 2 centers and QL-1 edges")
        if np.any(np.diff(self.edges) <= 0):
            raise ConfigError("quantizer edges must be strictly ascending")

    @property
    def QL(self):
        return self.centers.size

    @property
    def span(self):
        return self.input_range[1] - self.input_range[0]

    def to_dict(self):
        return {
            "edges": self.edges.tolist(),
            "centers": self.centers.tolist(),
            "QL": self.QL,
            "input_range": list(self.input_range),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.asarray(d["edges"], dtype=np.float64),
            np.asarray(d["centers"], dtype=np.float64),
            (float(d["input_range"][0]), float(d["input_range"][1])),
        )


def quantizer_fit(y_train, QL=32, binning="uniform"):
    """Bins over the training range of a scalar target.

    ``binning="uniform"`` places equal-width bins on ``[min, max]`` with
    centres at the midpoints. ``"quantile"`` uses empirical quantiles as
    edges and the per-bin mean as centre.
    """
    y = np.asarray(y_train, dtype=np.float64).ravel()
    if QL < 2:
        raise ConfigError("QL must be >= 2")
    if not np.all(np.isfinite(y)):
        raise ConfigError("target contains NaN or Inf")
    if np.unique(y).size < QL:
        raise DegenerateTargetError(f"target has fewer than QL={QL} distinct values")
    lo, hi = float(y.min()), float(y.max())
    if binning == "uniform":
        bounds = lo + (hi - lo) * np.arange(QL + 1) / QL
        bounds[-1] = hi
        edges = bounds[1:-1].copy()
        centers = 0.5 * (bounds[:-1] + bounds[1:])
    elif binning == "quantile":
        edges = np.unique(np.quantile(y, np.arange(1, QL) / QL))
        if edges.size != QL - 1:
            raise DegenerateTargetError("quantile edges collapse; too many ties for QL")
        which = np.searchsorted(edges, y, side="right")
        centers = np.array([y[which == k].mean() if np.any(which == k) else np.nan for k in range(QL)])
        bounds = np.r_[lo, edges, hi]
        missing = np.isnan(centers)
        centers[missing] = 0.5 * (bounds[:-1] + bounds[1:])[missing]
    else:
        raise ConfigError(f"unknown binning {binning!r}")
    return QuantizerModel(edges, centers, (lo, hi))


def quantizer_encode(q, y):
    """Bin index of every value; out-of-range values clamp to the end bins."""
    y = np.asarray(y, dtype=np.float64)
    return np.searchsorted(q.edges, y, side="right").astype(np.int64)


def quantizer_decode_expect(q, probs):
    """Expected value ``Σ_k p_k · centers[k]`` per row."""
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim == 1:
        p = p[None, :]
    if p.shape[-1] != q.QL:
        raise ShapeError(f"probabilities have {p.shape[-1]} columns, quantizer has {q.QL} levels")
    return p @ q.centers
