"""Wiener filter and Wiener cascade baselines."""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ..errors import ConfigError, ShapeError
from ..features import FeatureMatrix

__all__ = ["WienerModel", "wiener_fit", "wiener_predict", "wiener_cascade_fit", "wiener_normal_residual"]


@dataclass(eq=False)
class WienerModel:
    """Affine map ``y = [x, 1] · weightsᵀ`` (K × (D+1)); the cascade variant
    adds per-output polynomial coefficients (lowest order first) applied to
    the standardized linear output."""

    weights: np.ndarray
    ridge: float = 0.0
    poly: np.ndarray | None = None  # K × (g+1)
    poly_scale: np.ndarray | None = None  # K × 2: (mean, std) of linear output
    regularized_retry: bool = False
    info: dict = field(default_factory=dict)

    @property
    def degree(self):
        return 0 if self.poly is None else self.poly.shape[1] - 1

    @property
    def n_parameters(self):
        return int(self.weights.size + (0 if self.poly is None else self.poly.size))

    def to_dict(self):
        return {
            "schema_version": 1,
            "kind": "wiener_cascade" if self.poly is not None else "wiener",
            "weights": self.weights.tolist(),
            "ridge": self.ridge,
            "poly": None if self.poly is None else self.poly.tolist(),
            "poly_scale": None if self.poly_scale is None else self.poly_scale.tolist(),
            "regularized_retry": self.regularized_retry,
        }

    @classmethod
    def from_dict(cls, d):
        def arr(v):
            return None if v is None else np.atleast_2d(np.asarray(v, dtype=np.float64))

        return cls(arr(d["weights"]), float(d["ridge"]), arr(d["poly"]), arr(d["poly_scale"]), bool(d["regularized_retry"]))


def _xy(x, y):
    x = x.values if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"X has {x.shape[0]} rows, y has {y.shape[0]}")
    return x, y


def _augment(x):
    return np.hstack([x, np.ones((x.shape[0], 1))])


def _normal_system(xa, y, ridge):
    a = xa.T @ xa
    pen = np.full(xa.shape[1], float(ridge))
    pen[-1] = 0.0
    a[np.diag_indices_from(a)] += pen
    return a, xa.T @ y


def wiener_fit(x, y, ridge=0.0):
    """Ridge-penalized affine least squares (intercept unpenalized) via a
    Cholesky solve of the normal equations.

    A singular system at ``ridge=0`` is retried with ``1e-8`` and flagged
    in ``regularized_retry``.
    """
    if ridge < 0:
        raise ConfigError("ridge must be >= 0")
    x, y = _xy(x, y)
    xa = _augment(x)
    a, b = _normal_system(xa, y, ridge)
    retry = False
    try:
        sol = cho_solve(cho_factor(a), b)
        if not np.all(np.isfinite(sol)):
            raise LinAlgError("non-finite solution")
    except LinAlgError:
        if ridge > 0:
            raise
        warnings.warn("singular normal equations; retrying with ridge=1e-8", RuntimeWarning, stacklevel=2)
        retry = True
        ridge = 1e-8
        a, b = _normal_system(xa, y, ridge)
        sol = cho_solve(cho_factor(a), b)
    return WienerModel(np.ascontiguousarray(sol.T), float(ridge), regularized_retry=retry)


def wiener_normal_residual(model, x, y):
    """Max-abs residual of the normal equations at the fitted weights."""
    x, y = _xy(x, y)
    a, b = _normal_system(_augment(x), y, model.ridge)
    return float(np.max(np.abs(a @ model.weights.T - b)))


def _linear(model, x):
    return x @ model.weights[:, :-1].T + model.weights[:, -1]


def wiener_predict(model, x):
    x = x.values if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[1] + 1 != model.weights.shape[1]:
        raise ShapeError(f"expected {model.weights.shape[1] - 1} features, got {x.shape[1]}")
    lin = _linear(model, x)
    if model.poly is None:
        return lin
    out = np.empty_like(lin)
    for k in range(lin.shape[1]):
        z = (lin[:, k] - model.poly_scale[k, 0]) / model.poly_scale[k, 1]
        out[:, k] = np.polynomial.polynomial.polyval(z, model.poly[k])
    return out


def wiener_cascade_fit(x, y, ridge=0.0, degree=3):
    """Wiener filter followed by a per-output least-squares polynomial of the
    linear prediction."""
    if degree < 1:
        raise ConfigError("degree must be >= 1")
    x, y = _xy(x, y)
    base = wiener_fit(x, y, ridge)
    lin = _linear(base, x)
    k = y.shape[1]
    poly = np.empty((k, degree + 1))
    scale = np.empty((k, 2))
    for j in range(k):
        mu, sd = lin[:, j].mean(), lin[:, j].std()
        sd = sd if sd > 0 else 1.0
        z = (lin[:, j] - mu) / sd
        vander = np.vander(z, degree + 1, increasing=True)
        poly[j] = np.linalg.lstsq(vander, y[:, j], rcond=None)[0]
        scale[j] = (mu, sd)
    return WienerModel(base.weights, base.ridge, poly, scale, base.regularized_retry)
