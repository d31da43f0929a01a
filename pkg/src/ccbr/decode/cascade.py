"""Cascaded classification-based regression (CCBR).

Each output dimension gets its own cascade. Stage 1 quantizes the target,
classifies PCA scores into bins and reconstructs the expectation over bin
centres. Every later stage does the same for the residual left by the
stages before it. A stage is kept only if it raises validation R² by at
least ``min_gain``.
"""

from dataclasses import asdict, dataclass, field

import numpy as np

from ..classify import make_classifier, model_from_dict
from ..data import FoldSplit
from ..errors import ConfigError, DegenerateLabelsError, DegenerateTargetError, ShapeError, UndefinedMetricError
from ..features import FeatureMatrix, StandardizerModel, standardize_apply, standardize_fit
from ..reduce import PCAModel, pca_fit, pca_transform
from .metrics import r_squared
from .quantize import QuantizerModel, quantizer_decode_expect, quantizer_encode, quantizer_fit

__all__ = ["CCBRConfig", "CCBRModel", "Reduction", "fit_reduction", "ccbr_fit", "ccbr_fit_split", "ccbr_predict"]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CCBRConfig:
    QL: int = 32
    C: float = 1.0
    pc_selector: int | float = 0.90
    max_stages: int = 5
    min_gain: float = 0.002
    classifier_kind: object = "logistic"
    error_QL: int | None = None  # None: same as QL
    error_C: float | None = None  # None: same as C
    binning: str = "uniform"
    standardize: bool = True
    classifier_options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.QL < 2 or (self.error_QL is not None and self.error_QL < 2):
            raise ConfigError("QL must be >= 2")
        if not self.C > 0 or (self.error_C is not None and not self.error_C > 0):
            raise ConfigError("C must be positive")
        if self.max_stages < 1:
            raise ConfigError("max_stages must be >= 1")

    def stage_params(self, stage):
        if stage == 0:
            return self.QL, self.C
        return (self.error_QL or self.QL), (self.error_C or self.C)

    def to_dict(self):
        d = asdict(self)
        if callable(d["classifier_kind"]):
            d["classifier_kind"] = getattr(self.classifier_kind, "__name__", "custom")
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True, eq=False)
class Reduction:
    """Standardizer + PCA fitted on training rows, shared by all cascades."""

    standardizer: StandardizerModel | None
    pca: PCAModel

    def scores(self, x):
        arr = x.values if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)
        if self.standardizer is not None:
            arr = standardize_apply(self.standardizer, arr)
        return pca_transform(self.pca, arr)


def fit_reduction(x_train, pc_selector=0.90, standardize=True):
    arr = x_train.values if isinstance(x_train, FeatureMatrix) else np.asarray(x_train, dtype=np.float64)
    std = standardize_fit(arr) if standardize else None
    z = standardize_apply(std, arr) if std is not None else arr
    return Reduction(std, pca_fit(z, pc_selector))


@dataclass(eq=False)
class CCBRModel:
    reduction: Reduction
    stages: list  # (QuantizerModel, ProbClassifier)
    validation_trace: list
    train_mse_trace: list
    config: dict
    dim: int = 0

    @property
    def n_stages(self):
        return len(self.stages)

    @property
    def pca(self):
        return self.reduction.pca

    @property
    def standardizer(self):
        return self.reduction.standardizer

    @property
    def n_parameters(self):
        n = sum(c.n_parameters + q.QL for q, c in self.stages)
        return int(n + self.pca.components.size)

    def predict_from_scores(self, scores):
        out = np.zeros(scores.shape[0])
        for q, clf in self.stages:
            out += quantizer_decode_expect(q, clf.predict_proba(scores))
        return out

    def predict(self, x):
        return self.predict_from_scores(self.reduction.scores(x))

    def stage_outputs(self, x):
        s = self.reduction.scores(x)
        return np.stack([quantizer_decode_expect(q, c.predict_proba(s)) for q, c in self.stages], axis=1)

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "ccbr",
            "dim": self.dim,
            "standardizer": None if self.standardizer is None else self.standardizer.to_dict(),
            "pca": self.pca.to_dict(),
            "stages": [{"quantizer": q.to_dict(), "classifier": c.to_dict()} for q, c in self.stages],
            "validation_trace": list(self.validation_trace),
            "train_mse_trace": list(self.train_mse_trace),
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, d, reduction=None):
        if d.get("schema_version") != SCHEMA_VERSION or d.get("kind") != "ccbr":
            raise ConfigError("not a CCBR model document")
        if reduction is None:
            std = None if d["standardizer"] is None else StandardizerModel.from_dict(d["standardizer"])
            reduction = Reduction(std, PCAModel.from_dict(d["pca"]))
        stages = [(QuantizerModel.from_dict(s["quantizer"]), model_from_dict(s["classifier"])) for s in d["stages"]]
        return cls(reduction, stages, list(d["validation_trace"]), list(d["train_mse_trace"]), dict(d["config"]), int(d["dim"]))


def _fold_indices(fold):
    if isinstance(fold, FoldSplit):
        return fold.train_index(), fold.validation_index()
    train, val = fold
    return np.asarray(train, dtype=np.int64), np.asarray(val, dtype=np.int64)


def _val_score(y, yhat):
    try:
        return r_squared(y, yhat)[1]
    except UndefinedMetricError:
        return -float(np.mean((y - yhat) ** 2))


def _fit_dim(scores_tr, scores_va, y_tr, y_va, config, reduction, dim):
    y_span = float(y_tr.max() - y_tr.min())
    pred_tr = np.zeros_like(y_tr)
    pred_va = np.zeros_like(y_va)
    stages, trace, mse = [], [], []
    for s in range(config.max_stages):
        target = y_tr - pred_tr
        if s > 0 and float(target.max() - target.min()) < 1e-9 * y_span:
            break
        ql, c = config.stage_params(s)
        try:
            q = quantizer_fit(target, ql, config.binning)
            labels = quantizer_encode(q, target)
            fit = make_classifier(config.classifier_kind, C=c, **config.classifier_options)
            clf = fit(scores_tr, labels, ql)
        except (DegenerateTargetError, DegenerateLabelsError):
            if s == 0:
                raise
            break
        step_tr = quantizer_decode_expect(q, clf.predict_proba(scores_tr))
        step_va = quantizer_decode_expect(q, clf.predict_proba(scores_va))
        score = _val_score(y_va, pred_va + step_va)
        if s > 0 and not score >= trace[-1] + config.min_gain:
            break
        stages.append((q, clf))
        trace.append(score)
        pred_tr = pred_tr + step_tr
        pred_va = pred_va + step_va
        mse.append(float(np.mean((y_tr - pred_tr) ** 2)))
    return CCBRModel(reduction, stages, trace, mse, config.to_dict(), dim)


def _as_2d(x, y):
    arr = x.values if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if arr.shape[0] != y.shape[0]:
        raise ShapeError(f"X has {arr.shape[0]} rows, y has {y.shape[0]}")
    return arr, y


def ccbr_fit(x, y, fold, config=None, reduction=None):
    """Fit one cascade per kinematic dimension.

    ``fold`` is a :class:`FoldSplit` or a ``(train_index, validation_index)``
    pair; test rows are never touched. A precomputed ``reduction`` fitted on
    the same training rows may be passed to skip standardization and PCA.
    """
    arr, y = _as_2d(x, y)
    tr, va = _fold_indices(fold)
    return ccbr_fit_split(arr[tr], y[tr], arr[va], y[va], config, reduction)


def ccbr_fit_split(x_train, y_train, x_val, y_val, config=None, reduction=None):
    """As :func:`ccbr_fit`, with training and validation rows given apart."""
    config = config or CCBRConfig()
    x_train, y_train = _as_2d(x_train, y_train)
    x_val, y_val = _as_2d(x_val, y_val)
    if x_train.shape[0] < 2 or x_val.shape[0] < 1:
        raise ConfigError("fold needs at least two training rows and one validation row")
    if y_train.shape[1] != y_val.shape[1]:
        raise ShapeError("training and validation targets differ in dimension")
    if reduction is None:
        reduction = fit_reduction(x_train, config.pc_selector, config.standardize)
    s_tr = reduction.scores(x_train)
    s_va = reduction.scores(x_val)
    return [_fit_dim(s_tr, s_va, y_train[:, k], y_val[:, k], config, reduction, k) for k in range(y_train.shape[1])]


def ccbr_predict(models, x):
    """Sum of stage expectations for every dimension, shape T × K."""
    if isinstance(models, CCBRModel):
        models = [models]
    arr = x.values if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != models[0].pca.mean.shape[0]:
        raise ShapeError(f"expected {models[0].pca.mean.shape[0]} feature columns, got {arr.shape}")
    cache = {}
    out = np.empty((arr.shape[0], len(models)))
    for k, m in enumerate(models):
        key = id(m.reduction)
        if key not in cache:
            cache[key] = m.reduction.scores(arr)
        out[:, k] = m.predict_from_scores(cache[key])
    return out
