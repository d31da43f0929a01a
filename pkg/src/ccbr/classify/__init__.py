"""Probabilistic classifiers usable as CCBR stages or on their own."""

from ..errors import ConfigError
from .base import ProbClassifier, softmax
from .centroid import CentroidModel, centroid_fit, default_temperature, distances, kmeans_fit
from .compress import prune_weights, quantize_rows, quantize_weights
from .io import dumps, loads, model_from_dict
from .linear import LinearProbModel, lbfgs, logistic_fit, logistic_objective, platt_fit, svm_platt_fit
from .subset import SubsetModel, fit_present_classes
from .tree import TreeModel, gini, tree_fit
from .window import WindowModel, window_fit

CLASSIFIER_KINDS = ("logistic", "svm", "centroid", "window", "tree", "oblique_tree")


def make_classifier(kind="logistic", C=1.0, **options):
    """Return ``fit(x, labels, n_classes) -> ProbClassifier`` for ``kind``.

    A callable ``kind`` with that signature is returned unchanged, which is
    how tests inject custom stage classifiers.
    """
    if callable(kind):
        return kind
    if kind == "logistic":
        return lambda x, y, k: logistic_fit(x, y, C=C, n_classes=k, **options)
    if kind == "svm":
        return lambda x, y, k: svm_platt_fit(x, y, C=C, n_classes=k, **options)
    if kind == "centroid":
        return lambda x, y, k: fit_present_classes(centroid_fit, x, y, k, **options)
    if kind == "window":
        return lambda x, y, k: fit_present_classes(window_fit, x, y, k, **options)
    if kind in ("tree", "oblique_tree"):
        tk = "oblique" if kind == "oblique_tree" else "axis"
        opts = {"max_depth": 6, "min_leaf": 5, **options}
        return lambda x, y, k: tree_fit(x, y, kind=tk, n_classes=k, C=C, **opts)
    raise ConfigError(f"unknown classifier kind {kind!r}")


__all__ = [
    "CLASSIFIER_KINDS",
    "CentroidModel",
    "LinearProbModel",
    "ProbClassifier",
    "SubsetModel",
    "TreeModel",
    "WindowModel",
    "centroid_fit",
    "default_temperature",
    "distances",
    "dumps",
    "fit_present_classes",
    "gini",
    "kmeans_fit",
    "lbfgs",
    "loads",
    "logistic_fit",
    "logistic_objective",
    "make_classifier",
    "model_from_dict",
    "platt_fit",
    "prune_weights",
    "quantize_rows",
    "quantize_weights",
    "softmax",
    "svm_platt_fit",
    "tree_fit",
    "window_fit",
]
