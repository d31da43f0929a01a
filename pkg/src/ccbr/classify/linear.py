"""Linear probabilistic classifiers: multinomial logistic and hinge + Platt."""

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import ConfigError
from .base import SCHEMA_VERSION, ProbClassifier, check_xy, softmax

__all__ = ["LinearProbModel", "logistic_fit", "logistic_objective", "svm_platt_fit", "platt_fit", "lbfgs"]


@dataclass(eq=False)
class LinearProbModel(ProbClassifier):
    """Affine scores ``x·Wᵀ + b`` mapped to probabilities.

    ``calibration="softmax"`` applies a softmax across classes;
    ``"platt"`` maps each class score through ``1/(1+exp(A·s+B))`` and
    renormalizes.
    """

    weights: np.ndarray
    biases: np.ndarray
    C: float
    calibration: str = "softmax"
    platt: np.ndarray | None = None  # n_classes × 2 (A, B)
    info: dict = field(default_factory=dict)

    kind = "linear"

    def __post_init__(self):
        if not self.C > 0:
            raise ConfigError("C must be positive")
        if self.calibration not in ("softmax", "platt"):
            raise ConfigError(f"unknown calibration {self.calibration!r}")
        if self.calibration == "platt" and self.platt is None:
            raise ConfigError("platt calibration needs (A, B) per class")

    @property
    def n_classes(self):
        return self.weights.shape[0]

    @property
    def n_features(self):
        return self.weights.shape[1]

    @property
    def n_parameters(self):
        return int(self.weights.size + self.biases.size)

    @property
    def sparsity(self):
        return float(np.mean(self.weights == 0.0))

    def decision_function(self, x):
        x, single = self._check_input(x)
        s = x @ self.weights.T + self.biases
        return s[0] if single else s

    def _proba(self, x):
        s = x @ self.weights.T + self.biases
        if self.calibration == "softmax":
            return softmax(s)
        a, b = self.platt[:, 0], self.platt[:, 1]
        z = a * s + b
        # 1/(1+exp(z)) computed without overflow
        p = np.where(z >= 0, np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))), 1.0 / (1.0 + np.exp(-np.abs(z))))
        p = np.maximum(p, 1e-300)
        return p / p.sum(axis=1, keepdims=True)

    def with_weights(self, weights):
        return LinearProbModel(
            np.asarray(weights, dtype=np.float64), self.biases.copy(), self.C,
            self.calibration, None if self.platt is None else self.platt.copy(), dict(self.info),
        )

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "weights": self.weights.tolist(),
            "biases": self.biases.tolist(),
            "C": self.C,
            "calibration": self.calibration,
            "platt": None if self.platt is None else self.platt.tolist(),
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, d):
        w = np.asarray(d["weights"], dtype=np.float64)
        return cls(
            w.reshape(len(d["biases"]), -1),
            np.asarray(d["biases"], dtype=np.float64),
            float(d["C"]),
            d["calibration"],
            None if d.get("platt") is None else np.asarray(d["platt"], dtype=np.float64),
            dict(d.get("info", {})),
        )


# ---------------------------------------------------------------------------
# optimizer


def lbfgs(fun, x0, tol=1e-5, max_iter=2000, memory=10, precond=None):
    """Minimize ``fun(x) -> (value, grad)`` with L-BFGS directions and
    Armijo backtracking. Converged when ``max|grad| <= tol``.

    ``precond`` is an optional positive diagonal approximating the inverse
    Hessian; it shapes the search direction only, not the objective.

    Returns ``(x, value, grad, n_iter, converged)``.
    """
    x = np.array(x0, dtype=np.float64)
    h0 = np.ones_like(x) if precond is None else np.asarray(precond, dtype=np.float64)
    f, g = fun(x)
    s_hist, y_hist, rho_hist = [], [], []
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(g)) <= tol:
            return x, f, g, it - 1, True
        q = g.copy()
        alphas = []
        for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
            a = rho * (s @ q)
            alphas.append(a)
            q -= a * y
        if s_hist:
            q *= h0 * ((s_hist[-1] @ y_hist[-1]) / (y_hist[-1] @ (h0 * y_hist[-1])))
        else:
            q *= h0 / max(1.0, np.linalg.norm(h0 * g))
        for (s, y, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
            b = rho * (y @ q)
            q += (a - b) * s
        d = -q
        slope = g @ d
        if slope >= 0:
            s_hist.clear(), y_hist.clear(), rho_hist.clear()
            d = -h0 * g / max(1.0, np.linalg.norm(h0 * g))
            slope = g @ d
        step = 1.0
        while True:
            x_new = x + step * d
            f_new, g_new = fun(x_new)
            if f_new <= f + 1e-4 * step * slope or step < 1e-10:
                break
            step *= 0.5
        s, y = x_new - x, g_new - g
        sy = s @ y
        if sy > 1e-12 * np.sqrt((s @ s) * (y @ y)):
            s_hist.append(s)
            y_hist.append(y)
            rho_hist.append(1.0 / sy)
            if len(s_hist) > memory:
                s_hist.pop(0), y_hist.pop(0), rho_hist.pop(0)
        if step < 1e-10:
            return x_new, f_new, g_new, it, np.max(np.abs(g_new)) <= tol
        x, f, g = x_new, f_new, g_new
    return x, f, g, it, bool(np.max(np.abs(g)) <= tol)


# ---------------------------------------------------------------------------
# multinomial logistic regression


def logistic_objective(theta, x, labels, C):
    """Mean cross-entropy plus ``|θ|² / (2·C·T)``; returns ``(value, grad)``.

    ``θ`` packs ``[W | b]`` row-major as n_classes × (n_features + 1). The
    penalty covers the biases too, which keeps classes with no training
    samples at finite parameters.
    """
    t, d = x.shape
    wb = theta.reshape(-1, d + 1)
    loss, grad = kernels.softmax_xent(x, labels, wb)
    lam = 1.0 / (C * t)
    value = loss / t + 0.5 * lam * float(theta @ theta)
    return value, grad.ravel() / t + lam * theta


def logistic_fit(x, labels, C=1.0, n_classes=None, tol=1e-5, max_iter=2000):
    """Multinomial logistic regression from a zero start."""
    if not C > 0:
        raise ConfigError("C must be positive")
    x, labels, k = check_xy(x, labels, n_classes)
    t, d = x.shape
    x = np.ascontiguousarray(x)
    # inverse curvature of each parameter under uniform class probabilities
    lam = 1.0 / (C * t)
    col = np.r_[np.mean(x * x, axis=0), 1.0] * (1.0 / k) + lam
    precond = np.tile(1.0 / col, k)
    theta, value, grad, n_iter, ok = lbfgs(
        lambda th: logistic_objective(th, x, labels, C), np.zeros(k * (d + 1)), tol, max_iter, precond=precond
    )
    wb = theta.reshape(k, d + 1)
    info = {"n_iter": int(n_iter), "converged": bool(ok), "objective": value, "grad_max": float(np.max(np.abs(grad)))}
    return LinearProbModel(np.ascontiguousarray(wb[:, :d]), wb[:, d].copy(), float(C), "softmax", None, info)


# ---------------------------------------------------------------------------
# hinge loss + Platt scaling


def _svm_binary(x, y_pm, C, tol, max_epochs):
    xa = np.hstack([x, np.ones((x.shape[0], 1))])
    w, _, epochs = kernels.svm_dual_cd(xa, y_pm, C, tol, max_epochs)
    return w[:-1], w[-1], epochs


def platt_fit(scores, is_pos, max_iter=100):
    """Platt's sigmoid ``P(pos|s) = 1/(1+exp(A·s+B))`` by Newton iterations
    with regularized targets. Returns ``(A, B)``."""
    s = np.asarray(scores, dtype=np.float64)
    pos = np.asarray(is_pos, dtype=bool)
    n1, n0 = pos.sum(), (~pos).sum()
    t = np.where(pos, (n1 + 1.0) / (n1 + 2.0), 1.0 / (n0 + 2.0))
    a, b = 0.0, float(np.log((n0 + 1.0) / (n1 + 1.0)))

    def nll(a, b):
        z = a * s + b
        return float(np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-z)), (t - 1.0) * z + np.log1p(np.exp(z)))))

    f = nll(a, b)
    for _ in range(max_iter):
        z = a * s + b
        p = np.where(z >= 0, np.exp(-z) / (1.0 + np.exp(-z)), 1.0 / (1.0 + np.exp(z)))
        d1 = t - p
        d2 = p * (1.0 - p)
        g_a, g_b = float(s @ d1), float(d1.sum())
        h_aa = float(s * s @ d2) + 1e-12
        h_bb = float(d2.sum()) + 1e-12
        h_ab = float(s @ d2)
        if abs(g_a) < 1e-10 and abs(g_b) < 1e-10:
            break
        det = h_aa * h_bb - h_ab * h_ab
        da = -(h_bb * g_a - h_ab * g_b) / det
        db = -(-h_ab * g_a + h_aa * g_b) / det
        gd = g_a * da + g_b * db
        step = 1.0
        while step > 1e-10:
            fn = nll(a + step * da, b + step * db)
            if fn < f + 1e-4 * step * gd:
                break
            step *= 0.5
        else:
            break
        a, b, f = a + step * da, b + step * db, fn
    return a, b


def svm_platt_fit(x, labels, C=1.0, n_classes=None, tol=1e-4, max_epochs=1000, holdout_every=5):
    """One-vs-rest linear hinge-loss SVMs with Platt calibration.

    Calibration data: every ``holdout_every``-th row is held out, a
    provisional SVM is trained on the rest and the sigmoid is fitted on the
    held-out decision values. The reported weights come from a refit on
    all rows.
    """
    if not C > 0:
        raise ConfigError("C must be positive")
    x, labels, k = check_xy(x, labels, n_classes)
    hold = np.zeros(x.shape[0], dtype=bool)
    hold[::holdout_every] = True
    if hold.all() or not hold.any():
        hold[:] = False
        hold[::2] = True
    w = np.zeros((k, x.shape[1]))
    b = np.zeros(k)
    platt = np.zeros((k, 2))
    epochs = []
    for c in range(k):
        y_pm = np.where(labels == c, 1.0, -1.0)
        if not np.any(y_pm > 0):
            # absent class: constant very negative score, probability ~0
            w[c], b[c] = 0.0, -1.0
            platt[c] = (-1.0, 30.0)
            continue
        wc, bc, ep = _svm_binary(x[~hold], y_pm[~hold], C, tol, max_epochs)
        held = x[hold] @ wc + bc
        platt[c] = platt_fit(held, y_pm[hold] > 0)
        w[c], b[c], ep_full = _svm_binary(x, y_pm, C, tol, max_epochs)
        epochs.append(int(max(ep, ep_full)))
    info = {"max_epochs_used": max(epochs) if epochs else 0}
    return LinearProbModel(w, b, float(C), "platt", platt, info)
