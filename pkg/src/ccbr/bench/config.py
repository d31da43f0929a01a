"""Benchmark configuration: parsing, validation and defaults.

A config is a JSON object::

    {
      "schema_version": 1,
      "dataset": {"synth": {...SynthConfig fields...}} | {"path": "dir"},
      "features": {"source_kind": "spike_count", "bin_width": 0.05,
                   "lags_before": 27, "lags_after": 0},
      "decoders": [
        {"name": "ccbr", "kind": "ccbr", "config": {...CCBRConfig fields...}},
        {"name": "wf", "kind": "wiener", "ridge": [0, 10, 100]},
        {"name": "wc", "kind": "wiener_cascade", "ridge": [1, 10], "degree": [1, 2, 3]}
      ],
      "folds": {"n_folds": 10, "val_fraction": 0.1, "use": null},
      "sweeps": {"robustness": {"C": [0.1, 1, 10], "QL": [8, 16, 32, 64]}},
      "timing": {"ccbr": "ccbr", "baseline": {"kind": "wiener_cascade", ...}},
      "seed": 0,
      "output_dir": "bench_out"
    }

List-valued ``ridge``/``degree`` entries form a tuning grid whose best
point is picked on the validation block.
"""

import copy
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..data import SynthConfig
from ..decode.cascade import CCBRConfig
from ..errors import ConfigError

__all__ = [
    "SCHEMA_VERSION",
    "BenchConfig",
    "DecoderSpec",
    "SWEEP_PARAMS",
    "load_config",
    "grid_points",
]

SCHEMA_VERSION = 1
DECODER_KINDS = ("ccbr", "wiener", "wiener_cascade")
SOURCE_KINDS = ("spike_count", "threshold_crossing", "band_power")
CCBR_SWEEP_PARAMS = ("QL", "C", "pc_selector", "classifier_kind", "max_stages")
SWEEP_PARAMS = CCBR_SWEEP_PARAMS + ("bits", "sparsity", "channel_count")
SWEEP_ALIASES = {"PCs": "pc_selector", "pcs": "pc_selector"}

FEATURE_DEFAULTS = {
    "source_kind": "spike_count",
    "bin_width": 0.05,
    "lags_before": 0,
    "lags_after": 0,
    "threshold_scale": 4.5,
    "refractory": 1e-3,
    "band": [300.0, 1000.0],
}


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


@dataclass(frozen=True)
class DecoderSpec:
    name: str
    kind: str
    ccbr: CCBRConfig | None = None
    ridge: tuple = (0.0,)
    degree: tuple = (3,)

    @property
    def grid(self):
        """Tuning points ``(ridge, degree)`` searched on validation."""
        if self.kind == "wiener":
            return [(r, None) for r in self.ridge]
        if self.kind == "wiener_cascade":
            return list(itertools.product(self.ridge, self.degree))
        return [(None, None)]

    @classmethod
    def from_dict(cls, d, index=0):
        if not isinstance(d, dict) or "kind" not in d:
            raise ConfigError(f"decoder #{index} needs a 'kind'")
        kind = d["kind"]
        if kind not in DECODER_KINDS:
            raise ConfigError(f"decoder #{index}: unknown kind {kind!r}; expected one of {DECODER_KINDS}")
        name = str(d.get("name", kind))
        if kind == "ccbr":
            cfg = CCBRConfig.from_dict(d.get("config", {}))
            return cls(name, kind, ccbr=cfg)
        ridge = tuple(float(r) for r in _as_list(d.get("ridge", 0.0)))
        if not ridge or min(ridge) < 0:
            raise ConfigError(f"decoder {name!r}: ridge values must be a non-empty list of values >= 0")
        degree = tuple(int(g) for g in _as_list(d.get("degree", 3)))
        if kind == "wiener_cascade" and (not degree or min(degree) < 1):
            raise ConfigError(f"decoder {name!r}: degree values must be >= 1")
        return cls(name, kind, ridge=ridge, degree=degree if kind == "wiener_cascade" else ())

    def to_dict(self):
        if self.kind == "ccbr":
            return {"name": self.name, "kind": self.kind, "config": self.ccbr.to_dict()}
        d = {"name": self.name, "kind": self.kind, "ridge": list(self.ridge)}
        if self.kind == "wiener_cascade":
            d["degree"] = list(self.degree)
        return d


@dataclass(frozen=True)
class BenchConfig:
    dataset: dict
    features: dict
    decoders: tuple
    n_folds: int = 10
    val_fraction: float = 0.1
    use_folds: tuple | None = None
    sweeps: dict = field(default_factory=dict)
    timing: dict | None = None
    seed: int = 0
    output_dir: str = "bench_out"
    raw: dict = field(default_factory=dict, compare=False)

    @property
    def synth(self):
        """The synthetic-data config, or ``None`` for an on-disk dataset."""
        if "synth" not in self.dataset:
            return None
        d = dict(self.dataset["synth"])
        d.setdefault("noise_seed", self.seed)
        return SynthConfig.from_dict(d)

    def decoder(self, name):
        for spec in self.decoders:
            if spec.name == name:
                return spec
        raise ConfigError(f"no decoder named {name!r}")

    def first_ccbr(self):
        for spec in self.decoders:
            if spec.kind == "ccbr":
                return spec
        raise ConfigError("config has no ccbr decoder")

    def sweep(self, name):
        if name not in self.sweeps:
            raise ConfigError(f"no sweep grid named {name!r}; available: {sorted(self.sweeps)}")
        return self.sweeps[name]

    def to_dict(self):
        """Normalized form with defaults filled in (stored in every report)."""
        return {
            "schema_version": SCHEMA_VERSION,
            "dataset": copy.deepcopy(self.dataset),
            "features": copy.deepcopy(self.features),
            "decoders": [d.to_dict() for d in self.decoders],
            "folds": {
                "n_folds": self.n_folds,
                "val_fraction": self.val_fraction,
                "use": None if self.use_folds is None else list(self.use_folds),
            },
            "sweeps": copy.deepcopy(self.sweeps),
            "timing": copy.deepcopy(self.timing),
            "seed": self.seed,
            "output_dir": self.output_dir,
        }

    @classmethod
    def from_dict(cls, d, base_dir=None):
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")
        unknown = set(d) - {"schema_version", "dataset", "features", "decoders", "folds", "sweeps", "timing", "seed", "output_dir"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")

        dataset = d.get("dataset")
        if not isinstance(dataset, dict) or len({"synth", "path"} & set(dataset)) != 1:
            raise ConfigError("dataset must hold exactly one of 'synth' or 'path'")
        dataset = copy.deepcopy(dataset)
        if "path" in dataset and base_dir is not None:
            dataset["path"] = str((Path(base_dir) / dataset["path"]).resolve())

        features = {**FEATURE_DEFAULTS, **d.get("features", {})}
        unknown = set(features) - set(FEATURE_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown feature keys: {sorted(unknown)}")
        if features["source_kind"] not in SOURCE_KINDS:
            raise ConfigError(f"unknown source_kind {features['source_kind']!r}")
        if not float(features["bin_width"]) > 0:
            raise ConfigError("bin_width must be positive")
        if int(features["lags_before"]) < 0 or int(features["lags_after"]) < 0:
            raise ConfigError("lags must be nonnegative")

        decoders = d.get("decoders")
        if not decoders:
            raise ConfigError("at least one decoder is required")
        specs = tuple(DecoderSpec.from_dict(x, i) for i, x in enumerate(decoders))
        names = [s.name for s in specs]
        if len(set(names)) != len(names):
            raise ConfigError(f"decoder names must be unique, got {names}")

        folds = d.get("folds", {})
        n_folds = int(folds.get("n_folds", 10))
        val_fraction = float(folds.get("val_fraction", 0.1))
        use = folds.get("use")
        if use is not None:
            use = tuple(int(i) for i in use)
            if not use or min(use) < 0 or max(use) >= n_folds:
                raise ConfigError(f"folds.use must list fold indices in [0, {n_folds})")

        sweeps = {}
        for gname, grid in (d.get("sweeps") or {}).items():
            sweeps[gname] = _check_grid(gname, grid)

        timing = d.get("timing")
        if timing is not None:
            timing = _check_timing(timing, specs)

        cfg = cls(
            dataset=dataset,
            features=features,
            decoders=specs,
            n_folds=n_folds,
            val_fraction=val_fraction,
            use_folds=use,
            sweeps=sweeps,
            timing=timing,
            seed=int(d.get("seed", 0)),
            output_dir=str(d.get("output_dir", "bench_out")),
            raw=copy.deepcopy(d),
        )
        cfg.synth  # validates the synthetic config early
        return cfg


def _check_grid(name, grid):
    if not isinstance(grid, dict) or not grid:
        raise ConfigError(f"sweep {name!r} must be a non-empty object of parameter lists")
    out = {}
    for key, values in grid.items():
        key = SWEEP_ALIASES.get(key, key)
        if key not in SWEEP_PARAMS:
            raise ConfigError(f"sweep {name!r}: unknown parameter {key!r}; expected one of {SWEEP_PARAMS}")
        values = _as_list(values)
        if not values:
            raise ConfigError(f"sweep {name!r}: grid for {key!r} is empty")
        out[key] = values
    return out


def _check_timing(timing, specs):
    if not isinstance(timing, dict):
        raise ConfigError("timing must be an object")
    ccbr_name = timing.get("ccbr", next((s.name for s in specs if s.kind == "ccbr"), None))
    if ccbr_name is None or not any(s.name == ccbr_name and s.kind == "ccbr" for s in specs):
        raise ConfigError("timing needs a ccbr decoder")
    baseline = DecoderSpec.from_dict({"name": "baseline_grid", **timing.get("baseline", {})})
    if baseline.kind == "ccbr":
        raise ConfigError("timing baseline must be a Wiener decoder")
    if len(baseline.grid) < 12:
        raise ConfigError(f"timing baseline grid has {len(baseline.grid)} points; at least 12 are required")
    return {"ccbr": ccbr_name, "baseline": baseline.to_dict(), "repeats": int(timing.get("repeats", 1))}


def grid_points(grid):
    """Full-factorial points of ``{param: [values]}`` in a fixed order."""
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return BenchConfig.from_dict(d, base_dir=path.parent)
