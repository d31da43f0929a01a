"""Dataset container, CSV loading, synthetic generation and fold splitting."""

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, LoadError, ParseError, ValidationError

__all__ = [
    "NeuralDataset",
    "SynthConfig",
    "FoldSplit",
    "load_dataset",
    "save_dataset",
    "generate_synthetic",
    "make_folds",
    "bin_kinematics",
]


@dataclass(frozen=True, eq=False)
class NeuralDataset:
    """Neural activity and kinematics over one session.

    ``spike_units``/``spike_times`` hold sorted spike events (both ``None``
    when absent). ``continuous`` is channels × samples at ``rate_hz``.
    ``kinematics`` is samples × K at ``kin_rate_hz``.
    """

    kinematics: np.ndarray
    kin_rate_hz: float
    duration: float
    spike_units: np.ndarray | None = None
    spike_times: np.ndarray | None = None
    n_units: int = 0
    continuous: np.ndarray | None = None
    rate_hz: float | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    @property
    def has_spikes(self):
        return self.spike_times is not None

    @property
    def has_continuous(self):
        return self.continuous is not None

    def validate(self):
        if not self.has_spikes and not self.has_continuous:
            raise ValidationError("at least one of spike_events or continuous must be present")
        if not self.duration > 0:
            raise ValidationError("duration must be positive")
        if not self.kin_rate_hz > 0:
            raise ValidationError("kin_rate_hz must be positive")
        expected = int(round(self.duration * self.kin_rate_hz))
        if self.kinematics.ndim != 2 or self.kinematics.shape[0] != expected:
            raise ValidationError(
                f"kinematics length mismatch: {self.kinematics.shape[0]} rows, "
                f"expected {expected} for {self.duration} s at {self.kin_rate_hz} Hz"
            )
        if self.has_spikes:
            t, u = self.spike_times, self.spike_units
            if u is None or t.shape != u.shape:
                raise ValidationError("spike units and times must have equal length")
            if t.size and (t.min() < 0 or t.max() > self.duration):
                raise ValidationError("spike times must lie in [0, duration]")
            if u.size:
                present = np.unique(u)
                if present[0] < 0 or present[-1] >= max(self.n_units, 1):
                    raise ValidationError("unit indices must form a contiguous range starting at 0")
            if u.size and self.n_units != present.size:
                raise ValidationError("unit indices must form a contiguous range starting at 0")
        if self.has_continuous:
            if self.continuous.ndim != 2:
                raise ValidationError("continuous must be channels × samples")
            if not (self.rate_hz and self.rate_hz > 0):
                raise ValidationError("continuous data needs a positive rate_hz")

    def equals(self, other):
        """Exact equality of every array and scalar field."""

        def same(a, b):
            if a is None or b is None:
                return a is None and b is None
            return a.shape == b.shape and a.dtype == b.dtype and a.tobytes() == b.tobytes()

        return (
            self.duration == other.duration
            and self.kin_rate_hz == other.kin_rate_hz
            and self.n_units == other.n_units
            and self.rate_hz == other.rate_hz
            and same(self.kinematics, other.kinematics)
            and same(self.spike_units, other.spike_units)
            and same(self.spike_times, other.spike_times)
            and same(self.continuous, other.continuous)
        )

    def restrict_units(self, n):
        """Copy holding only spikes of units ``0..n-1`` (channel-count sweeps)."""
        if not self.has_spikes:
            raise ValidationError("restrict_units needs spike events")
        keep = self.spike_units < n
        return replace(
            self,
            spike_units=self.spike_units[keep],
            spike_times=self.spike_times[keep],
            n_units=min(n, self.n_units),
        )


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the cosine-tuned synthetic population.

    Unit rate is ``baseline + depth · (speed / speed_scale) ·
    (cos(angle − preferred) + speed_gain)``, optionally saturated, clipped at
    zero. ``preferred_direction`` of ``None`` draws directions from the seed.
    """

    n_units: int = 100
    duration: float = 800.0
    bin_hint_hz: float = 20.0
    baseline_rate: float = 10.0
    modulation_depth: float = 10.0
    preferred_direction: tuple | None = None
    speed_gain: float = 0.0
    smoothing_tau: float = 0.5
    speed_scale: float = 10.0
    nonlinearity: str = "none"
    saturation_rate: float = 40.0
    noise_seed: int = 0

    def __post_init__(self):
        if self.n_units < 1:
            raise ConfigError("n_units must be >= 1")
        if not self.duration > 0:
            raise ConfigError("duration must be positive")
        if self.baseline_rate < 0 or self.modulation_depth < 0:
            raise ConfigError("rates must be nonnegative")
        if not (self.bin_hint_hz > 0 and self.smoothing_tau > 0 and self.speed_scale > 0):
            raise ConfigError("bin_hint_hz, smoothing_tau and speed_scale must be positive")
        if self.nonlinearity not in ("none", "saturating"):
            raise ConfigError(f"unknown nonlinearity {self.nonlinearity!r}")
        if self.preferred_direction is not None and len(self.preferred_direction) != self.n_units:
            raise ConfigError("preferred_direction needs one angle per unit")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("preferred_direction") is not None:
            d["preferred_direction"] = tuple(d["preferred_direction"])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self):
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        if out["preferred_direction"] is not None:
            out["preferred_direction"] = list(out["preferred_direction"])
        return out


@dataclass(frozen=True)
class FoldSplit:
    """Index intervals ``[start, stop)`` over the binned timeline.

    Training data may be split in two pieces around the held-out blocks, so
    ``train_ranges`` is a tuple of intervals.
    """

    fold_index: int
    train_ranges: tuple
    validation_range: tuple
    test_range: tuple

    @staticmethod
    def _idx(ranges):
        return np.concatenate([np.arange(a, b) for a, b in ranges]) if ranges else np.empty(0, int)

    def train_index(self):
        return self._idx(self.train_ranges)

    def validation_index(self):
        return np.arange(*self.validation_range)

    def test_index(self):
        return np.arange(*self.test_range)

    def to_dict(self):
        return {
            "fold_index": self.fold_index,
            "train_ranges": [list(r) for r in self.train_ranges],
            "validation_range": list(self.validation_range),
            "test_range": list(self.test_range),
        }


# ---------------------------------------------------------------------------
# loading


def _read_csv(path, required=True):
    path = Path(path)
    if not path.exists():
        if required:
            raise LoadError(f"missing file: {path}")
        return None, None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return None, None
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(path, reader.line_num, f"expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ParseError(path, reader.line_num, str(exc)) from None
    return [h.strip() for h in header], np.asarray(rows, dtype=np.float64).reshape(-1, len(header))


def load_dataset(path):
    """Load a dataset directory (``spikes.csv``, ``continuous.csv``,
    ``kinematics.csv``, ``meta.json``)."""
    root = Path(path)
    meta_path = root / "meta.json"
    if not meta_path.exists():
        raise LoadError(f"missing file: {meta_path}")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        duration = float(meta["duration_s"])
        kin_rate = float(meta["kin_rate_hz"])
    except (ValueError, KeyError) as exc:
        raise ParseError(meta_path, 1, f"bad meta.json: {exc}") from None
    cont_rate = meta.get("continuous_rate_hz")

    header, kin = _read_csv(root / "kinematics.csv")
    if header is None:
        raise ValidationError("kinematics length mismatch: kinematics.csv has no rows")
    if header[0] != "t_s":
        raise ParseError(root / "kinematics.csv", 1, "header must start with t_s")
    kinematics = kin[:, 1:]

    units = times = None
    n_units = 0
    header, spk = _read_csv(root / "spikes.csv", required=False)
    if header is not None and spk.shape[0] > 0:
        if header != ["unit", "time_s"]:
            raise ParseError(root / "spikes.csv", 1, "header must be unit,time_s")
        if np.any(spk[:, 0] != np.round(spk[:, 0])):
            raise ValidationError("unit indices must be integers")
        order = np.lexsort((spk[:, 0], spk[:, 1]))
        units = spk[order, 0].astype(np.int64)
        times = spk[order, 1]
        n_units = int(units.max()) + 1

    continuous = None
    header, cont = _read_csv(root / "continuous.csv", required=False)
    if header is not None and cont.shape[0] > 0:
        if header[0] != "t_s":
            raise ParseError(root / "continuous.csv", 1, "header must start with t_s")
        continuous = np.ascontiguousarray(cont[:, 1:].T)
        if cont_rate is None:
            raise ValidationError("continuous.csv present but continuous_rate_hz is null")
        cont_rate = float(cont_rate)
    else:
        cont_rate = None

    return NeuralDataset(
        kinematics=kinematics,
        kin_rate_hz=kin_rate,
        duration=duration,
        spike_units=units,
        spike_times=times,
        n_units=n_units,
        continuous=continuous,
        rate_hz=cont_rate,
        metadata={k: v for k, v in meta.items() if k not in ("duration_s", "kin_rate_hz", "continuous_rate_hz")},
    )


def save_dataset(ds, path):
    """Write ``ds`` in the directory schema read by :func:`load_dataset`."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    meta = {
        "duration_s": ds.duration,
        "continuous_rate_hz": ds.rate_hz if ds.has_continuous else None,
        "kin_rate_hz": ds.kin_rate_hz,
    }
    meta.update(ds.metadata)
    (root / "meta.json").write_text(json.dumps(meta, indent=2), encoding="utf-8")

    with open(root / "spikes.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write("unit,time_s\n")
        if ds.has_spikes:
            for u, t in zip(ds.spike_units.tolist(), ds.spike_times.tolist()):
                fh.write(f"{u},{t!r}\n")

    k = ds.kinematics.shape[1]
    with open(root / "kinematics.csv", "w", newline="", encoding="utf-8") as fh:
        fh.write("t_s," + ",".join(f"y{i}" for i in range(k)) + "\n")
        for i, row in enumerate(ds.kinematics.tolist()):
            fh.write(f"{i / ds.kin_rate_hz!r}," + ",".join(repr(v) for v in row) + "\n")

    if ds.has_continuous:
        c = ds.continuous.shape[0]
        with open(root / "continuous.csv", "w", newline="", encoding="utf-8") as fh:
            fh.write("t_s," + ",".join(f"ch{i}" for i in range(c)) + "\n")
            for i, col in enumerate(ds.continuous.T.tolist()):
                fh.write(f"{i / ds.rate_hz!r}," + ",".join(repr(v) for v in col) + "\n")


# ---------------------------------------------------------------------------
# synthetic data


def _velocity_process(rng, n, dt, tau, scale):
    a = math.exp(-dt / tau)
    noise = rng.standard_normal((n, 2)) * (scale * math.sqrt(1.0 - a * a))
    v = np.empty((n, 2))
    v[0] = rng.standard_normal(2) * scale
    for i in range(1, n):
        v[i] = a * v[i - 1] + noise[i]
    return v


def generate_synthetic(config):
    """Cosine-tuned spiking population driven by a smoothed 2-D velocity.

    Velocity is a mean-reverting (leaky) random walk sampled at
    ``bin_hint_hz``. Spikes come from Poisson thinning against rates held
    constant on a 1 ms grid. The output depends only on ``config``.
    """
    rng = np.random.default_rng(config.noise_seed)
    kin_rate = float(config.bin_hint_hz)
    n_kin = int(round(config.duration * kin_rate))
    vel = _velocity_process(rng, n_kin, 1.0 / kin_rate, config.smoothing_tau, config.speed_scale)

    if config.preferred_direction is None:
        pd = rng.uniform(-np.pi, np.pi, config.n_units)
    else:
        pd = np.asarray(config.preferred_direction, dtype=np.float64)

    dt_fine = 1e-3
    n_fine = int(math.ceil(config.duration / dt_fine))
    t_fine = (np.arange(n_fine) + 0.5) * dt_fine
    t_kin = np.arange(n_kin) / kin_rate
    vx = np.interp(t_fine, t_kin, vel[:, 0])
    vy = np.interp(t_fine, t_kin, vel[:, 1])
    speed = np.hypot(vx, vy) / config.speed_scale
    angle = np.arctan2(vy, vx)

    units, times = [], []
    for u in range(config.n_units):
        rate = config.baseline_rate + config.modulation_depth * speed * (
            np.cos(angle - pd[u]) + config.speed_gain
        )
        if config.nonlinearity == "saturating":
            s = config.saturation_rate
            rate = s * np.tanh(np.maximum(rate, 0.0) / s)
        rate = np.maximum(rate, 0.0)
        peak = float(rate.max()) if rate.size else 0.0
        if peak <= 0.0:
            continue
        n_cand = rng.poisson(peak * config.duration)
        cand = np.sort(rng.uniform(0.0, config.duration, n_cand))
        idx = np.minimum((cand / dt_fine).astype(np.int64), n_fine - 1)
        keep = rng.uniform(0.0, peak, n_cand) < rate[idx]
        t = cand[keep]
        times.append(t)
        units.append(np.full(t.size, u, dtype=np.int64))

    times = np.concatenate(times) if times else np.empty(0)
    units = np.concatenate(units) if units else np.empty(0, dtype=np.int64)
    order = np.lexsort((units, times))
    times, units = times[order], units[order]
    # every unit index must be present for the contiguity invariant
    n_present = int(np.unique(units).size) if units.size else 0
    if n_present != config.n_units:
        remap = np.full(config.n_units, -1, dtype=np.int64)
        remap[np.unique(units)] = np.arange(n_present)
        units = remap[units]

    return NeuralDataset(
        kinematics=vel,
        kin_rate_hz=kin_rate,
        duration=float(config.duration),
        spike_units=units,
        spike_times=times,
        n_units=n_present,
        metadata={"source": "synthetic", "preferred_direction": pd.tolist()},
    )


def bin_kinematics(ds, bin_width):
    """Kinematics averaged over each bin ``[tΔ, (t+1)Δ)``; bins with no
    sample fall back to interpolation at the bin centre."""
    if not bin_width > 0:
        raise ConfigError("bin_width must be positive")
    n_bins = int(math.floor(ds.duration / bin_width + 1e-9))
    t_kin = np.arange(ds.kinematics.shape[0]) / ds.kin_rate_hz
    which = np.floor(t_kin / bin_width + 1e-9).astype(np.int64)
    ok = which < n_bins
    k = ds.kinematics.shape[1]
    sums = np.zeros((n_bins, k))
    np.add.at(sums, which[ok], ds.kinematics[ok])
    counts = np.bincount(which[ok], minlength=n_bins).astype(np.float64)
    out = np.empty((n_bins, k))
    have = counts > 0
    out[have] = sums[have] / counts[have, None]
    if not have.all():
        centres = (np.flatnonzero(~have) + 0.5) * bin_width
        for j in range(k):
            out[~have, j] = np.interp(centres, t_kin, ds.kinematics[:, j])
    return out


# ---------------------------------------------------------------------------
# folds


def make_folds(n_bins, n_folds=10, val_fraction=0.1):
    """Contiguous folds: each test block is one slice of the timeline, the
    validation block sits just before it (just after it for the first fold),
    and everything else trains."""
    if n_folds < 2:
        raise ConfigError("n_folds must be >= 2")
    if not 0.0 < val_fraction < 0.5:
        raise ConfigError("val_fraction must lie in (0, 0.5)")
    n_val = max(1, int(round(val_fraction * n_bins)))
    if n_bins // n_folds < 1 or n_bins // n_folds + n_val >= n_bins:
        raise ConfigError(f"cannot split {n_bins} bins into {n_folds} folds with {n_val} validation bins")

    bounds = np.cumsum([0] + [len(b) for b in np.array_split(np.arange(n_bins), n_folds)])
    folds = []
    for f in range(n_folds):
        t0, t1 = int(bounds[f]), int(bounds[f + 1])
        if t0 >= n_val:
            v0, v1 = t0 - n_val, t0
        elif t1 + n_val <= n_bins:
            v0, v1 = t1, t1 + n_val
        else:
            raise ConfigError(f"fold {f}: no room for {n_val} validation bins beside test block [{t0}, {t1})")
        lo, hi = min(t0, v0), max(t1, v1)
        train = tuple(r for r in ((0, lo), (hi, n_bins)) if r[1] > r[0])
        if not train:
            raise ConfigError(f"fold {f}: no training bins left")
        folds.append(FoldSplit(f, train, (v0, v1), (t0, t1)))
    return folds
