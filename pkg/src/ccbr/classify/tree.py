"""Axis-parallel and oblique decision trees grown greedily on Gini impurity."""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import ConfigError, DegenerateLabelsError
from .base import SCHEMA_VERSION, ProbClassifier, check_xy
from .linear import logistic_fit

__all__ = ["TreeModel", "tree_fit", "gini"]


def gini(counts):
    n = counts.sum()
    return 0.0 if n == 0 else 1.0 - float(np.sum((counts / n) ** 2))


@dataclass(eq=False)
class TreeModel(ProbClassifier):
    """Flat node arrays; node 0 is the root and ``left == -1`` marks a leaf.

    Axis trees test ``x[feature] <= threshold``; oblique trees test
    ``weights[node] · x <= threshold``. ``value`` holds class frequencies.
    """

    tree_kind: str
    feature: np.ndarray
    weights: np.ndarray | None
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_features_in: int
    max_depth: int
    min_leaf: int

    kind = "tree"

    def __post_init__(self):
        if self.tree_kind not in ("axis", "oblique"):
            raise ConfigError(f"unknown tree kind {self.tree_kind!r}")

    @property
    def n_classes(self):
        return self.value.shape[1]

    @property
    def n_features(self):
        return self.n_features_in

    @property
    def n_nodes(self):
        return self.left.shape[0]

    @property
    def n_parameters(self):
        internal = self.left >= 0
        per = self.n_features_in if self.tree_kind == "oblique" else 1
        return int(internal.sum() * (per + 1) + (~internal).sum() * self.n_classes)

    def depth(self):
        depth = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.left[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def go_left(self, node, x):
        if self.tree_kind == "axis":
            return x[:, self.feature[node]] <= self.threshold[node]
        return x @ self.weights[node] <= self.threshold[node]

    def apply(self, x):
        """Leaf index reached by every row."""
        x, _ = self._check_input(x)
        node = np.zeros(x.shape[0], dtype=np.int64)
        active = self.left[node] >= 0
        while active.any():
            for nd in np.unique(node[active]):
                rows = np.flatnonzero(node == nd)
                gl = self.go_left(nd, x[rows])
                node[rows] = np.where(gl, self.left[nd], self.right[nd])
            active = self.left[node] >= 0
        return node

    def _proba(self, x):
        return self.value[self.apply(x)].copy()

    def with_weights(self, weights):
        return TreeModel(
            self.tree_kind, self.feature.copy(), np.asarray(weights, dtype=np.float64),
            self.threshold.copy(), self.left.copy(), self.right.copy(), self.value.copy(),
            self.n_features_in, self.max_depth, self.min_leaf,
        )

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "tree_kind": self.tree_kind,
            "feature": self.feature.tolist(),
            "weights": None if self.weights is None else self.weights.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "n_features": self.n_features_in,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
        }

    @classmethod
    def from_dict(cls, d):
        w = d.get("weights")
        return cls(
            d["tree_kind"],
            np.asarray(d["feature"], dtype=np.int64),
            None if w is None else np.asarray(w, dtype=np.float64).reshape(len(d["left"]), -1),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.int64),
            np.asarray(d["right"], dtype=np.int64),
            np.asarray(d["value"], dtype=np.float64).reshape(len(d["left"]), -1),
            int(d["n_features"]),
            int(d["max_depth"]),
            int(d["min_leaf"]),
        )


def _split_impurity(side, y, k):
    nl, n = side.sum(), side.size
    cl = np.bincount(y[side], minlength=k).astype(float)
    cr = np.bincount(y[~side], minlength=k).astype(float)
    return (nl * gini(cl) + (n - nl) * gini(cr)) / n


def _oblique_split(x, y, k, min_leaf, C):
    """Logistic separator for the class-vs-rest partition of lowest Gini."""
    counts = np.bincount(y, minlength=k)
    n = y.size
    present = np.flatnonzero(counts)
    # impurity of splitting off class c perfectly: only the rest stays mixed
    best_c, best_imp = None, np.inf
    for c in present:
        rest = counts.astype(float).copy()
        rest[c] = 0
        imp = (n - counts[c]) / n * gini(rest)
        if imp < best_imp:
            best_c, best_imp = int(c), imp
    target = (y == best_c).astype(np.int64)
    try:
        lm = logistic_fit(x, target, C=C, n_classes=2)
    except DegenerateLabelsError:
        return None
    w = lm.weights[1] - lm.weights[0]
    thr = -(lm.biases[1] - lm.biases[0])
    side = x @ w <= thr
    nl = side.sum()
    if nl < min_leaf or n - nl < min_leaf:
        return None
    return w, thr, _split_impurity(side, y, k)


def tree_fit(x, labels, kind="axis", max_depth=5, min_leaf=1, n_classes=None, C=1.0):
    """Greedy top-down induction.

    Axis nodes take the exhaustive Gini-optimal (feature, midpoint) split.
    Oblique nodes fit a two-class logistic separator for the class-vs-rest
    partition with the lowest Gini and keep it unless the best axis split is
    purer, in which case that split is stored as a unit weight vector.
    """
    if kind not in ("axis", "oblique"):
        raise ConfigError(f"unknown tree kind {kind!r}")
    if max_depth < 1 or min_leaf < 1:
        raise ConfigError("max_depth and min_leaf must be >= 1")
    x, labels, k = check_xy(x, labels, n_classes, min_distinct=1)
    d = x.shape[1]

    feature, weights, threshold, left, right, value = [], [], [], [], [], []

    def new_node(idx):
        counts = np.bincount(labels[idx], minlength=k).astype(np.float64)
        feature.append(-1)
        weights.append(np.zeros(d))
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(counts / counts.sum())
        return len(left) - 1

    stack = [(new_node(np.arange(x.shape[0])), np.arange(x.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        y = labels[idx]
        counts = np.bincount(y, minlength=k)
        parent = gini(counts.astype(float))
        if depth >= max_depth or parent == 0.0 or idx.size < 2 * min_leaf:
            continue
        xs = x[idx]
        f, thr, imp = kernels.best_axis_split(xs, y, k, min_leaf)
        split = None
        if f >= 0:
            unit = np.zeros(d)
            unit[f] = 1.0
            split = (f, unit, thr, imp)
        if kind == "oblique":
            ob = _oblique_split(xs, y, k, min_leaf, C)
            if ob is not None and (split is None or ob[2] <= split[3]):
                split = (-1, ob[0], ob[1], ob[2])
        if split is None or split[3] >= parent - 1e-12:
            continue
        f, w, thr, _ = split
        go_left = xs[:, f] <= thr if kind == "axis" else xs @ w <= thr
        li, ri = idx[go_left], idx[~go_left]
        if li.size == 0 or ri.size == 0:
            continue
        feature[node], weights[node], threshold[node] = f, w, thr
        ln, rn = new_node(li), new_node(ri)
        left[node], right[node] = ln, rn
        stack.append((rn, ri, depth + 1))
        stack.append((ln, li, depth + 1))

    return TreeModel(
        kind,
        np.asarray(feature, dtype=np.int64),
        np.asarray(weights) if kind == "oblique" else None,
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(value),
        d,
        int(max_depth),
        int(min_leaf),
    )
