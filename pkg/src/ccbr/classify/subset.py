"""Adapter for backends that cannot represent classes absent from training."""

import numpy as np

from .base import SCHEMA_VERSION, ProbClassifier


class SubsetModel(ProbClassifier):
    """Model fitted on the present classes only; absent classes get
    probability zero."""

    kind = "subset"

    def __init__(self, inner, classes, n_classes):
        self.inner = inner
        self.classes = np.asarray(classes, dtype=np.int64)
        self.n_classes = int(n_classes)
        self.n_features = inner.n_features

    @property
    def n_parameters(self):
        return self.inner.n_parameters

    def _proba(self, x):
        p = np.zeros((x.shape[0], self.n_classes))
        p[:, self.classes] = self.inner._proba(x)
        return p

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "classes": self.classes.tolist(),
            "n_classes": self.n_classes,
            "inner": self.inner.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        from .io import model_from_dict

        return cls(model_from_dict(d["inner"]), d["classes"], d["n_classes"])


def fit_present_classes(fit, x, labels, n_classes, **options):
    classes, dense = np.unique(np.asarray(labels), return_inverse=True)
    inner = fit(x, dense, **options)
    if classes.size == n_classes:
        return inner
    return SubsetModel(inner, classes, n_classes)
