"""Shared pieces of the probabilistic classifier backends."""

import numpy as np

from ..errors import DegenerateLabelsError, ShapeError

SCHEMA_VERSION = 1


def softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def check_xy(x, labels, n_classes=None, min_distinct=2):
    """Validate a training set; returns ``(x, labels, n_classes)``."""
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or labels.ndim != 1 or labels.shape[0] != x.shape[0]:
        raise ShapeError(f"X {x.shape} and labels {labels.shape} do not align")
    if labels.size and np.any(labels != np.round(labels)):
        raise DegenerateLabelsError("labels must be integer class indices")
    labels = labels.astype(np.int64)
    if labels.size and labels.min() < 0:
        raise DegenerateLabelsError("labels must be nonnegative")
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if labels.size else 0
    elif labels.size and labels.max() >= n_classes:
        raise DegenerateLabelsError("label exceeds n_classes")
    if np.unique(labels).size < min_distinct:
        raise DegenerateLabelsError(f"need at least {min_distinct} distinct labels")
    if x.shape[0] < n_classes:
        raise DegenerateLabelsError("fewer samples than classes")
    return x, labels, int(n_classes)


class ProbClassifier:
    """Contract: ``predict_proba`` returns nonnegative rows that sum to one."""

    kind = "abstract"
    n_classes: int
    n_features: int

    def _scores(self, x):
        raise NotImplementedError

    def _check_input(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        x = np.atleast_2d(x)
        if x.shape[1] != self.n_features:
            raise ShapeError(f"expected {self.n_features} features, got {x.shape[1]}")
        return x, single

    def predict_proba(self, x):
        x, single = self._check_input(x)
        p = self._proba(x)
        return p[0] if single else p

    def predict(self, x):
        p = self.predict_proba(x)
        return np.argmax(p, axis=-1)

    def _proba(self, x):
        raise NotImplementedError

    @property
    def n_parameters(self):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError
