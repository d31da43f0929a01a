"""Weight quantization and magnitude pruning for edge deployment."""

import numpy as np

from ..errors import ConfigError
from .linear import LinearProbModel
from .tree import TreeModel

__all__ = ["quantize_rows", "quantize_weights", "prune_weights"]


def quantize_rows(w, bits):
    """Uniform per-row quantization to ``2**bits`` levels on ``[-m, m]``,
    ``m = max|row|``. Rows of zeros are left alone."""
    w = np.asarray(w, dtype=np.float64)
    levels = 2**bits - 1
    m = np.max(np.abs(w), axis=1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    k = np.round((w / safe + 1.0) * (levels / 2.0))
    q = safe * (2.0 * k / levels - 1.0)
    return np.where(m > 0, q, w)


def quantize_weights(model, bits):
    """Quantize the weight matrix of a linear model or oblique tree.

    Biases and tree thresholds stay at full precision.
    """
    if not isinstance(bits, (int, np.integer)) or not 2 <= bits <= 24:
        raise ConfigError("bits must be an integer in [2, 24]")
    if isinstance(model, LinearProbModel):
        return model.with_weights(quantize_rows(model.weights, bits))
    if isinstance(model, TreeModel) and model.tree_kind == "oblique":
        return model.with_weights(quantize_rows(model.weights, bits))
    raise ConfigError("quantize_weights supports linear models and oblique trees")


def prune_weights(model, sparsity):
    """Zero the ``round(sparsity · n)`` smallest-magnitude weights (global)."""
    if not isinstance(model, LinearProbModel):
        raise ConfigError("prune_weights supports linear models")
    if not 0.0 <= sparsity < 1.0:
        raise ConfigError("sparsity must lie in [0, 1)")
    w = model.weights.copy()
    n_zero = int(round(sparsity * w.size))
    if n_zero == 0:
        return model.with_weights(w)
    order = np.argsort(np.abs(w), axis=None, kind="stable")
    w.flat[order[:n_zero]] = 0.0
    return model.with_weights(w)
