"""Principal component analysis on the training covariance."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from . import kernels
from .errors import ConfigError, FitError, ShapeError
from .features import FeatureMatrix

__all__ = ["PCAModel", "pca_fit", "pca_transform", "covariance_eigh"]


@dataclass(frozen=True, eq=False)
class PCAModel:
    mean: np.ndarray
    components: np.ndarray  # D × P, orthonormal columns
    explained_variance: np.ndarray
    total_variance: float

    @property
    def n_components(self):
        return self.components.shape[1]

    def to_dict(self):
        return {
            "mean": self.mean.tolist(),
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
            "total_variance": self.total_variance,
        }

    @classmethod
    def from_dict(cls, d):
        comps = np.asarray(d["components"], dtype=np.float64)
        return cls(
            np.asarray(d["mean"], dtype=np.float64),
            comps.reshape(len(d["mean"]), -1),
            np.asarray(d["explained_variance"], dtype=np.float64),
            float(d["total_variance"]),
        )


JACOBI_MAX_DIM = 256
LANCZOS_MAX_FRACTION = 0.25
SOLVERS = ("auto", "jacobi", "lapack", "lanczos")


def _resolve_solver(solver, dim, n_top):
    if solver not in SOLVERS:
        raise ConfigError(f"unknown eigen solver {solver!r}")
    if solver == "auto":
        if dim <= JACOBI_MAX_DIM:
            return "jacobi"
        if n_top is not None and n_top <= LANCZOS_MAX_FRACTION * dim:
            return "lanczos"
        return "lapack"
    if solver == "lanczos" and (n_top is None or n_top >= dim):
        return "lapack"
    return solver


def _lanczos_top(cov, n_top):
    d = cov.shape[0]
    # fixed start vector keeps the iteration, and so the model, deterministic
    v0 = 1.0 + np.arange(d) / d
    try:
        return scipy.sparse.linalg.eigsh(cov, k=n_top, which="LA", v0=v0, tol=0.0)
    except scipy.sparse.linalg.ArpackNoConvergence:
        return scipy.linalg.eigh(cov, subset_by_index=[d - n_top, d - 1], driver="evr")


def covariance_eigh(cov, tol=1e-12, max_sweeps=100, solver="auto", n_top=None):
    """Eigenpairs of a symmetric matrix, sorted by descending eigenvalue,
    with the largest-magnitude entry of each eigenvector made positive.

    ``solver="auto"`` uses cyclic Jacobi up to ``JACOBI_MAX_DIM`` columns.
    Beyond that, where Jacobi's cubic sweeps dominate fit time, it uses
    Lanczos iterations when only a few leading pairs are wanted
    (``n_top``) and LAPACK otherwise.
    """
    d = cov.shape[0]
    solver = _resolve_solver(solver, d, n_top)
    if solver == "jacobi":
        values, vectors, _ = kernels.jacobi_eigh(cov, tol, max_sweeps)
    elif solver == "lanczos":
        values, vectors = _lanczos_top(cov, n_top)
    elif n_top is not None and n_top < d:
        values, vectors = scipy.linalg.eigh(cov, subset_by_index=[d - n_top, d - 1], driver="evr")
    else:
        values, vectors = np.linalg.eigh(cov)
    order = np.argsort(-values, kind="stable")
    values, vectors = values[order], vectors[:, order]
    pivot = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivot, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return values, vectors * signs


def _normalize_selector(selector):
    if isinstance(selector, dict):
        if "n_components" in selector:
            selector = int(selector["n_components"])
        elif "variance" in selector:
            selector = float(selector["variance"])
        else:
            raise ConfigError(f"bad PC selector {selector!r}")
    return selector


def _fixed_count(selector, d):
    """The component count of a fixed selector, or None for a variance fraction."""
    selector = _normalize_selector(selector)
    if isinstance(selector, (int, np.integer)) and not isinstance(selector, bool):
        if not 1 <= selector <= d:
            raise ConfigError(f"fixed PC count must lie in [1, {d}]")
        return int(selector)
    return None


def _n_from_selector(values, selector):
    d = values.size
    fixed = _fixed_count(selector, d)
    if fixed is not None:
        return fixed
    v = float(_normalize_selector(selector))
    if not 0.0 < v <= 1.0:
        raise ConfigError("variance fraction must lie in (0, 1]")
    total = values.sum()
    if total <= 0:
        return 1
    cum = np.cumsum(values) / total
    # relative slack keeps v=1.0 from failing on rounding in the last ulp
    return int(min(d, np.searchsorted(cum, v - 1e-12) + 1))


def pca_fit(x, selector=0.90, tol=1e-12, max_sweeps=100, solver="auto"):
    """Fit PCA on the rows of ``x``.

    ``selector`` is an ``int`` (fixed component count) or a ``float`` in
    (0, 1] (smallest count whose cumulative explained variance reaches it).
    """
    arr = x.values if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise FitError("pca_fit needs at least two rows")
    mean = arr.mean(axis=0)
    centred = arr - mean
    cov = centred.T @ centred / (arr.shape[0] - 1)
    fixed = _fixed_count(selector, cov.shape[0])
    values, vectors = covariance_eigh(cov, tol, max_sweeps, solver, n_top=fixed)
    values = np.maximum(values, 0.0)
    p = fixed if fixed is not None else _n_from_selector(values, selector)
    p = min(p, arr.shape[0])
    return PCAModel(mean, np.ascontiguousarray(vectors[:, :p]), values[:p].copy(), float(np.trace(cov)))


def pca_transform(model, x):
    arr = x.values if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != model.mean.shape[0]:
        raise ShapeError(f"expected {model.mean.shape[0]} columns, got {arr.shape}")
    return (arr - model.mean) @ model.components
