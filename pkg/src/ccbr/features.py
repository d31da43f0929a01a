"""Decoder inputs: binned counts, threshold crossings, band power, lags."""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, ShapeError, UnsupportedInputError, ValidationError

__all__ = [
    "FeatureMatrix",
    "StandardizerModel",
    "bin_spike_counts",
    "threshold_crossing_rate",
    "butter_bandpass_sos",
    "sos_frequency_response",
    "spiking_band_power",
    "lag_embed",
    "trim_target",
    "standardize_fit",
    "standardize_apply",
    "robust_noise",
]

SOURCE_KINDS = ("spike_count", "threshold_crossing", "band_power")


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    values: np.ndarray
    bin_width: float | None = None
    lags_before: int = 0
    lags_after: int = 0
    source_kind: str = "spike_count"

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValidationError(f"feature matrix must be T×D with T, D >= 1, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValidationError("feature matrix contains NaN or Inf")
        if v.shape[1] % (self.lags_before + self.lags_after + 1):
            raise ValidationError("column count is not a multiple of the lag window")
        if self.source_kind not in SOURCE_KINDS:
            raise ValidationError(f"unknown source_kind {self.source_kind!r}")

    @property
    def shape(self):
        return self.values.shape

    @property
    def base_channels(self):
        return self.values.shape[1] // (self.lags_before + self.lags_after + 1)


def _as_array(x):
    return x.values if isinstance(x, FeatureMatrix) else np.asarray(x, dtype=np.float64)


def _n_bins(duration, bin_width):
    return int(math.floor(duration / bin_width + 1e-9))


def _bin_events(units, times, n_channels, n_bins, bin_width):
    idx = np.floor(np.asarray(times) / bin_width).astype(np.int64)
    ok = (idx >= 0) & (idx < n_bins)
    flat = idx[ok] * n_channels + np.asarray(units)[ok]
    counts = np.bincount(flat, minlength=n_bins * n_channels)
    return counts.reshape(n_bins, n_channels).astype(np.float64)


def bin_spike_counts(dataset, bin_width):
    """Spike counts per unit in bins ``[tΔ, (t+1)Δ)``, shape T × units."""
    if not dataset.has_spikes:
        raise UnsupportedInputError("dataset has no spike events")
    if not bin_width > 0:
        raise ConfigError("bin_width must be positive")
    n_bins = _n_bins(dataset.duration, bin_width)
    return _bin_events(dataset.spike_units, dataset.spike_times, dataset.n_units, n_bins, bin_width)


def robust_noise(x):
    """Per-row noise level ``median(|x|) / 0.6745``."""
    return np.median(np.abs(x), axis=-1) / 0.6745


def threshold_crossing_rate(
    continuous,
    rate_hz,
    threshold_scale=4.5,
    refractory=1e-3,
    bin_width=0.05,
    polarity="negative",
    fixed_threshold=None,
    return_events=False,
):
    """Count threshold crossings per channel and bin, without spike sorting.

    The threshold is ``-threshold_scale · robust_noise`` per channel unless
    ``fixed_threshold`` (a signed level) is given. ``polarity="positive"``
    detects upward crossings of the mirrored level instead.
    """
    if not rate_hz or rate_hz <= 0:
        raise ConfigError("rate_hz must be positive")
    if refractory < 0:
        raise ConfigError("refractory must be >= 0")
    if not bin_width > 0:
        raise ConfigError("bin_width must be positive")
    if polarity not in ("negative", "positive"):
        raise ConfigError(f"unknown polarity {polarity!r}")
    x = np.atleast_2d(np.asarray(continuous, dtype=np.float64))
    sign = 1.0 if polarity == "negative" else -1.0
    x_signed = sign * x
    if fixed_threshold is None:
        thr = -threshold_scale * robust_noise(x)
    else:
        thr = np.full(x.shape[0], sign * float(fixed_threshold))
    refr = int(round(refractory * rate_hz))

    events = [kernels.threshold_crossings(x_signed[c], thr[c], refr) for c in range(x.shape[0])]
    if return_events:
        return events
    n_bins = _n_bins(x.shape[1] / rate_hz, bin_width)
    units = np.concatenate([np.full(e.size, c) for c, e in enumerate(events)]).astype(np.int64)
    times = np.concatenate(events) / rate_hz if units.size else np.empty(0)
    return _bin_events(units, times, x.shape[0], n_bins, bin_width)


def butter_bandpass_sos(low_hz, high_hz, rate_hz, order=2):
    """Butterworth band-pass as biquad sections via the bilinear transform.

    ``order`` is the low-pass prototype order; the band-pass has twice that
    order and ``order`` sections. Band edges are pre-warped.
    """
    if not 0 < low_hz < high_hz < rate_hz / 2:
        raise ConfigError("band edges must satisfy 0 < low < high < rate/2")
    fs2 = 2.0 * rate_hz
    w1 = fs2 * math.tan(math.pi * low_hz / rate_hz)
    w2 = fs2 * math.tan(math.pi * high_hz / rate_hz)
    bw, w0sq = w2 - w1, w1 * w2

    proto = [np.exp(1j * math.pi * (2 * k + order + 1) / (2 * order)) for k in range(order)]
    poles = []
    for p in proto:
        pb = p * bw
        disc = np.sqrt(pb * pb - 4.0 * w0sq)
        poles += [(pb + disc) / 2.0, (pb - disc) / 2.0]
    poles = np.asarray(poles)
    # analog zeros: `order` at s=0; gain bw**order
    gain = bw**order * fs2**order / np.prod(fs2 - poles)
    zpoles = (fs2 + poles) / (fs2 - poles)

    upper = sorted((p for p in zpoles if p.imag > 0), key=lambda p: abs(p))
    if len(upper) != order:
        raise ConfigError("band too narrow for a biquad realization")
    sos = np.zeros((order, 6))
    for i, p in enumerate(upper):
        sos[i] = [1.0, 0.0, -1.0, 1.0, -2.0 * p.real, abs(p) ** 2]
    sos[0, :3] *= float(np.real(gain))
    return sos


def sos_frequency_response(sos, freq_hz, rate_hz):
    """Complex response of the cascade at ``freq_hz``."""
    z = np.exp(-1j * 2.0 * np.pi * np.asarray(freq_hz, dtype=np.float64) / rate_hz)
    h = np.ones_like(z)
    for b0, b1, b2, a0, a1, a2 in sos:
        h = h * (b0 + b1 * z + b2 * z * z) / (a0 + a1 * z + a2 * z * z)
    return h


def spiking_band_power(continuous, rate_hz, band=(300.0, 1000.0), bin_width=0.05):
    """Mean squared band-passed signal per bin and channel (T × C).

    The filter is causal, so the first few milliseconds carry its transient.
    """
    low, high = band
    if not rate_hz or rate_hz <= 2.0 * high:
        raise ConfigError(f"rate_hz={rate_hz} violates Nyquist for a {high} Hz band edge")
    if not bin_width > 0:
        raise ConfigError("bin_width must be positive")
    x = np.atleast_2d(np.asarray(continuous, dtype=np.float64))
    y = kernels.sosfilt(butter_bandpass_sos(low, high, rate_hz), x)
    n_samples = x.shape[1]
    n_bins = _n_bins(n_samples / rate_hz, bin_width)
    which = np.floor(np.arange(n_samples) / (bin_width * rate_hz) + 1e-9).astype(np.int64)
    ok = which < n_bins
    counts = np.bincount(which[ok], minlength=n_bins).astype(np.float64)
    out = np.empty((n_bins, x.shape[0]))
    for c in range(x.shape[0]):
        out[:, c] = np.bincount(which[ok], weights=y[c, ok] ** 2, minlength=n_bins)
    return out / np.maximum(counts, 1.0)[:, None]


def lag_embed(base, lags_before=0, lags_after=0, bin_width=None, source_kind="spike_count"):
    """Concatenate rows ``t-lags_before .. t+lags_after`` of ``base``.

    Rows without full context are dropped, leaving ``T - lags_before -
    lags_after`` rows; trim the target with :func:`trim_target`.
    """
    base = np.asarray(base, dtype=np.float64)
    if base.ndim != 2:
        raise ShapeError("base must be T × C")
    if lags_before < 0 or lags_after < 0:
        raise ConfigError("lags must be nonnegative")
    width = lags_before + lags_after + 1
    t = base.shape[0]
    if width > t:
        raise ConfigError(f"lag window of {width} rows exceeds series length {t}")
    windows = np.lib.stride_tricks.sliding_window_view(base, width, axis=0)
    values = np.ascontiguousarray(windows.transpose(0, 2, 1).reshape(t - width + 1, -1))
    return FeatureMatrix(values, bin_width, lags_before, lags_after, source_kind)


def trim_target(y, lags_before=0, lags_after=0):
    y = np.asarray(y)
    return y[lags_before : y.shape[0] - lags_after]


@dataclass(frozen=True, eq=False)
class StandardizerModel:
    mean: np.ndarray
    std: np.ndarray
    constant: np.ndarray

    def to_dict(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist(), "constant": self.constant.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.asarray(d["mean"], dtype=np.float64),
            np.asarray(d["std"], dtype=np.float64),
            np.asarray(d["constant"], dtype=bool),
        )


def standardize_fit(train):
    """Column means and population standard deviations of ``train``."""
    x = _as_array(train)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ShapeError("standardize_fit needs a non-empty T × D matrix")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    constant = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    std = np.where(constant, 1.0, std)
    return StandardizerModel(mean, std, constant)


def standardize_apply(model, x):
    arr = _as_array(x)
    if arr.ndim != 2 or arr.shape[1] != model.mean.shape[0]:
        raise ShapeError(f"expected {model.mean.shape[0]} columns, got {arr.shape}")
    z = (arr - model.mean) / model.std
    z[:, model.constant] = 0.0
    if isinstance(x, FeatureMatrix):
        return FeatureMatrix(z, x.bin_width, x.lags_before, x.lags_after, x.source_kind)
    return z
