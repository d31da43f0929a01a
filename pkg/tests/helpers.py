"""Small data builders shared by the tests."""

import numpy as np

from ccbr.classify import ProbClassifier

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def blobs(rng, n_per, centers, scale=1.0):
    """Gaussian clusters around ``centers``; labels follow center order."""
    centers = np.asarray(centers, dtype=float)
    x = np.concatenate([c + scale * rng.standard_normal((n_per, centers.shape[1])) for c in centers])
    y = np.repeat(np.arange(len(centers)), n_per)
    return x, y


def write_dataset(root, spikes=None, kinematics=None, kin_rate=25.0, duration=10.0, continuous=None, cont_rate=None):
    """Write a dataset directory by hand (not via save_dataset)."""
    import json

    root.mkdir(parents=True, exist_ok=True)
    meta = {"duration_s": duration, "continuous_rate_hz": cont_rate, "kin_rate_hz": kin_rate}
    (root / "meta.json").write_text(json.dumps(meta))
    lines = ["unit,time_s"] + [f"{u},{t}" for u, t in (spikes or [])]
    (root / "spikes.csv").write_text("\n".join(lines) + "\n")
    if kinematics is not None:
        k = kinematics.shape[1]
        rows = ["t_s," + ",".join(f"y{i}" for i in range(k))]
        rows += [f"{i / kin_rate}," + ",".join(repr(float(v)) for v in r) for i, r in enumerate(kinematics)]
        (root / "kinematics.csv").write_text("\n".join(rows) + "\n")
    if continuous is not None:
        c = continuous.shape[0]
        rows = ["t_s," + ",".join(f"ch{i}" for i in range(c))]
        rows += [f"{i / cont_rate}," + ",".join(repr(float(v)) for v in col) for i, col in enumerate(continuous.T)]
        (root / "continuous.csv").write_text("\n".join(rows) + "\n")


class NearestRowOracle(ProbClassifier):
    """Returns the one-hot label of the nearest training row.

    On the training rows themselves this is the true label, which is what
    the quantization-bound checks need.
    """

    kind = "oracle"

    def __init__(self, x, labels, k):
        self.x, self.labels, self.n_classes, self.n_features = x, labels, k, x.shape[1]

    def _proba(self, x):
        d = ((x[:, None, :] - self.x[None, :, :]) ** 2).sum(-1)
        p = np.zeros((x.shape[0], self.n_classes))
        p[np.arange(x.shape[0]), self.labels[np.argmin(d, axis=1)]] = 1.0
        return p

    @property
    def n_parameters(self):
        return self.x.size


def oracle_fit(x, labels, k):
    return NearestRowOracle(np.array(x), np.array(labels), k)


def separable_reference(seed, n_per=200, n_classes=5, d=20, gap=5.0):
    """Unit-variance Gaussian classes whose means sit ``gap`` apart along
    their own axes; a fixed seed gives the reference set."""
    rng = np.random.default_rng(seed)
    centers = np.zeros((n_classes, d))
    centers[np.arange(n_classes), np.arange(n_classes)] = gap
    return blobs(rng, n_per, centers)
