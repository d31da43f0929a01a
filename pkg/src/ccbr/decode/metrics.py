import numpy as np

from ..errors import ShapeError, UndefinedMetricError


def r_squared(y_true, y_pred):
    """Per-dimension coefficient of determination and their mean.

    Returns ``(per_dim, mean)``; values can be negative.
    """
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    if yt.ndim == 1:
        yt = yt[:, None]
    if yp.ndim == 1:
        yp = yp[:, None]
    if yt.shape != yp.shape:
        raise ShapeError(f"shape mismatch {yt.shape} vs {yp.shape}")
    if yt.shape[0] < 2:
        raise UndefinedMetricError("R² needs at least two samples")
    ss_tot = np.sum((yt - yt.mean(axis=0)) ** 2, axis=0)
    flat = np.flatnonzero(ss_tot == 0)
    if flat.size:
        raise UndefinedMetricError(f"y_true dimension {int(flat[0])} is constant; R² undefined")
    per_dim = 1.0 - np.sum((yt - yp) ** 2, axis=0) / ss_tot
    return per_dim, float(per_dim.mean())
