"""Cross-validated evaluation, hyperparameter sweeps and timing comparison.

Every cell (decoder × fold × sweep point) sees its data only through a
:class:`RowAccess`, which hands out training/validation/test rows by
purpose and can log every request. Reports keep metrics and wall-clock
timings in separate sections so that reruns can be compared exactly on
the former.
"""

import csv
import json
import platform
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from .. import __version__
from .._accel import backend_name
from ..classify import LinearProbModel, TreeModel, prune_weights, quantize_weights
from ..data import generate_synthetic, load_dataset, make_folds, bin_kinematics
from ..decode import (
    CCBRConfig,
    ccbr_fit_split,
    ccbr_predict,
    fit_reduction,
    r_squared,
    wiener_cascade_fit,
    wiener_fit,
    wiener_predict,
)
from ..errors import CCBRError, ConfigError
from ..features import bin_spike_counts, lag_embed, spiking_band_power, threshold_crossing_rate, trim_target
from .config import CCBR_SWEEP_PARAMS, SCHEMA_VERSION, DecoderSpec, grid_points

__all__ = [
    "RowAccess",
    "BenchData",
    "prepare_data",
    "run_benchmark",
    "sweep_robustness",
    "run_sweep",
    "compare_training_time",
    "aggregate",
    "metrics_section",
    "write_report",
    "environment",
]


def environment():
    return {
        "package": f"ccbr {__version__}",
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "kernel_backend": backend_name(),
        "platform": platform.platform(),
    }


# ---------------------------------------------------------------------------
# data


class BenchData:
    """Feature matrix ``x`` (lag-embedded, T × D) and aligned targets ``y``."""

    def __init__(self, x, y, base_channels, source_kind):
        self.x = x
        self.y = y
        self.base_channels = base_channels
        self.source_kind = source_kind

    @property
    def n_rows(self):
        return self.x.shape[0]


def load_bench_dataset(cfg):
    synth = cfg.synth
    if synth is not None:
        return generate_synthetic(synth)
    return load_dataset(cfg.dataset["path"])


def base_features(ds, features):
    kind = features["source_kind"]
    bw = float(features["bin_width"])
    if kind == "spike_count":
        return bin_spike_counts(ds, bw)
    if ds.continuous is None:
        raise ConfigError(f"source_kind {kind!r} needs continuous data")
    if kind == "threshold_crossing":
        return threshold_crossing_rate(
            ds.continuous, ds.rate_hz, float(features["threshold_scale"]), float(features["refractory"]), bw
        )
    return spiking_band_power(ds.continuous, ds.rate_hz, tuple(features["band"]), bw)


def prepare_data(cfg, dataset=None, channel_count=None):
    """Features and targets for ``cfg``; ``channel_count`` keeps the first
    that many base channels (scalability sweeps)."""
    ds = dataset if dataset is not None else load_bench_dataset(cfg)
    f = cfg.features
    base = base_features(ds, f)
    y = bin_kinematics(ds, float(f["bin_width"]))
    n = min(base.shape[0], y.shape[0])
    base, y = base[:n], y[:n]
    if channel_count is not None:
        channel_count = int(channel_count)
        if not 1 <= channel_count <= base.shape[1]:
            raise ConfigError(f"channel_count {channel_count} outside [1, {base.shape[1]}]")
        base = base[:, :channel_count]
    lb, la = int(f["lags_before"]), int(f["lags_after"])
    x = lag_embed(base, lb, la, float(f["bin_width"]), f["source_kind"]).values
    return BenchData(x, trim_target(y, lb, la), base.shape[1], f["source_kind"])


class RowAccess:
    """Row-level gate over ``x``/``y``.

    ``take(index, purpose)`` returns the requested rows; with ``log`` set,
    every request is appended as ``(fold, purpose, index)`` so tests can
    verify that test rows never reach a fit or selection step.
    """

    PURPOSES = ("fit", "select", "test")

    def __init__(self, data, fold_index, log=None):
        self._data = data
        self._fold = fold_index
        self._log = log

    def take(self, index, purpose):
        if purpose not in self.PURPOSES:
            raise ValueError(f"unknown purpose {purpose!r}")
        index = np.asarray(index, dtype=np.int64)
        if self._log is not None:
            self._log.append((self._fold, purpose, index.copy()))
        return self._data.x[index], self._data.y[index]


# ---------------------------------------------------------------------------
# one cell


def _ccbr_config(spec, point):
    over = {k: v for k, v in point.items() if k in CCBR_SWEEP_PARAMS}
    if "pc_selector" in over and isinstance(over["pc_selector"], float) and over["pc_selector"].is_integer() and over["pc_selector"] > 1:
        over["pc_selector"] = int(over["pc_selector"])
    return replace(spec.ccbr, **over) if over else spec.ccbr


def _compress(models, point):
    bits, sparsity = point.get("bits"), point.get("sparsity")
    if bits is None and sparsity is None:
        return models
    out = []
    for m in models:
        stages = []
        for q, clf in m.stages:
            if not isinstance(clf, (LinearProbModel, TreeModel)):
                raise ConfigError(f"bits/sparsity sweeps need linear or oblique-tree stages, got {type(clf).__name__}")
            if sparsity is not None:
                clf = prune_weights(clf, float(sparsity))
            if bits is not None:
                clf = quantize_weights(clf, int(bits))
            stages.append((q, clf))
        out.append(replace(m, stages=stages))
    return out


def _score(y, yhat):
    per_dim, mean = r_squared(y, yhat)
    return [float(v) for v in per_dim], float(mean)


def _fit_wiener(spec, x_tr, y_tr, x_va, y_va):
    """Fit every tuning point, return the one best on validation."""
    best = None
    for ridge, degree in spec.grid:
        if spec.kind == "wiener":
            model = wiener_fit(x_tr, y_tr, ridge)
        else:
            model = wiener_cascade_fit(x_tr, y_tr, ridge, degree)
        _, val = _score(y_va, wiener_predict(model, x_va))
        if best is None or val > best[0]:
            best = (val, model, {"ridge": ridge, "degree": degree})
    return best


def _fit_decoder(spec, point, x_tr, y_tr, x_va, y_va, reduction=None):
    """Returns ``(predict_fn, info)``. Only train/validation rows come in."""
    if spec.kind == "ccbr":
        cfg = _ccbr_config(spec, point)
        models = ccbr_fit_split(x_tr, y_tr, x_va, y_va, cfg, reduction=reduction)
        models = _compress(models, point)
        info = {
            "n_stages": [m.n_stages for m in models],
            "validation_r2": [m.validation_trace[-1] for m in models],
            "model_size": int(sum(m.n_parameters for m in models) - (len(models) - 1) * models[0].pca.components.size),
            "selected": None,
            "n_components": int(models[0].pca.n_components),
        }
        return (lambda x: ccbr_predict(models, x)), info
    val, model, sel = _fit_wiener(spec, x_tr, y_tr, x_va, y_va)
    info = {"n_stages": None, "validation_r2": val, "model_size": int(model.n_parameters), "selected": sel}
    return (lambda x: wiener_predict(model, x)), info


def run_cell(spec, point, fold, access, features, reduction=None):
    """Fit on train, select on validation, report on test; never raises
    for decoder failures (they become error records)."""
    record = {
        "decoder": spec.name,
        "fold": fold.fold_index,
        "point": dict(point),
        "status": "ok",
        "metrics": None,
        "timing": None,
        "config": {
            "decoder": spec.to_dict() if spec.kind != "ccbr" else {**spec.to_dict(), "config": _ccbr_config(spec, point).to_dict()},
            "features": dict(features),
            "fold": fold.to_dict(),
            "reduction_cached": reduction is not None,
        },
    }
    try:
        x_tr, y_tr = access.take(fold.train_index(), "fit")
        x_va, y_va = access.take(fold.validation_index(), "select")
        t0 = time.perf_counter()
        predict, info = _fit_decoder(spec, point, x_tr, y_tr, x_va, y_va, reduction)
        t_fit = time.perf_counter() - t0
        x_te, y_te = access.take(fold.test_index(), "test")
        t0 = time.perf_counter()
        y_hat = predict(x_te)
        t_pred = time.perf_counter() - t0
        per_dim, mean = _score(y_te, y_hat)
    except (CCBRError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        record["status"] = "error"
        record["error"] = f"{type(exc).__name__}: {exc}"
        return record
    record["metrics"] = {"r2_per_dim": per_dim, "r2_mean": mean, **info}
    record["timing"] = {"fit_wall_time": t_fit, "predict_wall_time": t_pred}
    return record


# ---------------------------------------------------------------------------
# aggregation and report plumbing


def _point_key(point):
    return json.dumps(point, sort_keys=True)


def aggregate(records):
    """Mean and population STD across folds per (decoder, sweep point).

    Output order follows first appearance in ``records``.
    """
    groups = {}
    for r in records:
        groups.setdefault((r["decoder"], _point_key(r["point"])), []).append(r)
    out = []
    for (name, _), rs in groups.items():
        ok = [r for r in rs if r["status"] == "ok"]
        agg = {"decoder": name, "point": dict(rs[0]["point"]), "n_ok": len(ok), "n_error": len(rs) - len(ok)}
        if ok:
            r2 = np.array([r["metrics"]["r2_mean"] for r in ok])
            dims = np.array([r["metrics"]["r2_per_dim"] for r in ok])
            fit = np.array([r["timing"]["fit_wall_time"] for r in ok])
            pred = np.array([r["timing"]["predict_wall_time"] for r in ok])
            agg["metrics"] = {
                "r2_mean": float(r2.mean()),
                "r2_std": float(r2.std()),
                "r2_per_dim_mean": [float(v) for v in dims.mean(axis=0)],
                "r2_per_dim_std": [float(v) for v in dims.std(axis=0)],
            }
            agg["timing"] = {
                "fit_wall_time_mean": float(fit.mean()),
                "fit_wall_time_std": float(fit.std()),
                "predict_wall_time_mean": float(pred.mean()),
                "predict_wall_time_std": float(pred.std()),
            }
        else:
            agg["metrics"] = None
            agg["timing"] = None
        out.append(agg)
    return out


def _report(kind, cfg, records, **extra):
    full = cfg.to_dict()
    for r in records:
        r["config"].update(dataset=full["dataset"], folds=full["folds"], seed=full["seed"])
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "config": cfg.to_dict(),
        "environment": environment(),
        "records": records,
        "aggregates": aggregate(records),
        **extra,
    }


def all_failed(report):
    recs = report.get("records", [])
    return bool(recs) and all(r["status"] != "ok" for r in recs)


def metrics_section(report):
    """Canonical JSON of everything except timings and environment."""
    keep = {
        "records": [
            {k: r.get(k) for k in ("decoder", "fold", "point", "status", "metrics", "error")} for r in report["records"]
        ],
        "aggregates": [{k: a[k] for k in ("decoder", "point", "n_ok", "n_error", "metrics")} for a in report["aggregates"]],
    }
    for k in ("spread",):
        if k in report:
            keep[k] = report[k]
    return json.dumps(keep, sort_keys=True)


RECORD_COLUMNS = (
    "decoder", "fold", "point", "status", "r2_mean", "r2_per_dim", "n_stages",
    "model_size", "fit_wall_time", "predict_wall_time", "error",
)


def write_report(report, out_dir, stem=None):
    """Write ``<stem>.json`` and a flat ``<stem>_records.csv``; returns paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = stem or f"report_{report['kind']}"
    jpath = out / f"{stem}.json"
    jpath.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    cpath = out / f"{stem}_records.csv"
    with cpath.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in report["records"]:
            m, t = r.get("metrics") or {}, r.get("timing") or {}
            w.writerow([
                r["decoder"], r["fold"], _point_key(r["point"]), r["status"],
                repr(m["r2_mean"]) if m else "",
                json.dumps(m.get("r2_per_dim")) if m else "",
                json.dumps(m.get("n_stages")) if m else "",
                m.get("model_size", "") if m else "",
                repr(t["fit_wall_time"]) if t else "",
                repr(t["predict_wall_time"]) if t else "",
                r.get("error", ""),
            ])
    return jpath, cpath


# ---------------------------------------------------------------------------
# entry points


def _folds(cfg, data):
    folds = make_folds(data.n_rows, cfg.n_folds, cfg.val_fraction)
    if cfg.use_folds is not None:
        folds = [folds[i] for i in cfg.use_folds]
    return folds


def run_benchmark(cfg, dataset=None, access_log=None):
    """Every decoder on every fold. Returns the report dict."""
    data = prepare_data(cfg, dataset)
    records = []
    for fold in _folds(cfg, data):
        access = RowAccess(data, fold.fold_index, access_log)
        for spec in cfg.decoders:
            records.append(run_cell(spec, {}, fold, access, cfg.features))
    return _report("run", cfg, records)


def _spread(records, decoder_names):
    """Max − min of test R² across grid points, per fold and of fold means."""
    out = {}
    for name in decoder_names:
        rs = [r for r in records if r["decoder"] == name and r["status"] == "ok"]
        if not rs:
            continue
        per_fold = {}
        for r in rs:
            per_fold.setdefault(r["fold"], []).append(r["metrics"]["r2_mean"])
        folds = [
            {"fold": f, "min": float(min(v)), "max": float(max(v)), "spread": float(max(v) - min(v))}
            for f, v in per_fold.items()
        ]
        means = [a["metrics"]["r2_mean"] for a in aggregate(rs) if a["metrics"]]
        out[name] = {
            "per_fold": folds,
            "max_fold_spread": max(f["spread"] for f in folds),
            "fold_mean_spread": float(max(means) - min(means)),
            "fold_mean_min": float(min(means)),
            "fold_mean_max": float(max(means)),
        }
    return out


def run_sweep(cfg, grid, grid_name="custom", dataset=None, access_log=None):
    """Full-factorial sweep of ``grid`` (``{param: [values]}``).

    CCBR parameters, ``bits`` and ``sparsity`` apply to the ccbr decoders;
    a grid made only of ``channel_count`` applies to every decoder. The
    standardizer and PCA depend only on the fold, the channel count and the
    PC selector, so they are fitted once per such combination and reused.
    """
    from .config import _check_grid

    grid = _check_grid(grid_name, grid)
    ds = dataset if dataset is not None else load_bench_dataset(cfg)
    points = grid_points(grid)
    channel_only = set(grid) == {"channel_count"}
    specs = [s for s in cfg.decoders if channel_only or s.kind == "ccbr"]
    if not specs:
        raise ConfigError(f"sweep {grid_name!r} needs a ccbr decoder")

    by_channels = {}
    for p in points:
        by_channels.setdefault(p.get("channel_count"), []).append(p)
    records = []
    for channels, pts in by_channels.items():
        data = prepare_data(cfg, ds, channels)
        for fold in _folds(cfg, data):
            access = RowAccess(data, fold.fold_index, access_log)
            cache = {}
            for spec in specs:
                for p in pts:
                    red = None
                    if spec.kind == "ccbr":
                        ccfg = _ccbr_config(spec, p)
                        key = (repr(ccfg.pc_selector), ccfg.standardize)
                        if key not in cache:
                            try:
                                x_tr, _ = access.take(fold.train_index(), "fit")
                                cache[key] = fit_reduction(x_tr, ccfg.pc_selector, ccfg.standardize)
                            except CCBRError:
                                cache[key] = None
                        red = cache[key]
                    records.append(run_cell(spec, p, fold, access, cfg.features, red))
    return _report("sweep", cfg, records, grid_name=grid_name, grid=grid, spread=_spread(records, [s.name for s in specs]))


def sweep_robustness(cfg, grid=None, dataset=None, access_log=None):
    """C × QL sweep (``grid`` defaults to the config's ``robustness`` grid)."""
    if grid is None:
        grid = cfg.sweep("robustness")
    if set(grid) - {"C", "QL"} or any(len(v) < 2 for v in grid.values()) or len(grid) != 2:
        raise ConfigError("robustness grid must cover at least two values each of C and QL")
    return run_sweep(cfg, grid, "robustness", dataset, access_log)


def compare_training_time(cfg, dataset=None, access_log=None):
    """Wall time of one CCBR fit vs a full baseline grid search per fold.

    Both sides run on the same training/validation rows. The baseline fits
    every grid point and picks the best on validation. With ``repeats`` > 1
    each side keeps its fastest repetition.
    """
    if cfg.timing is None:
        raise ConfigError("config has no 'timing' section")
    ccbr_spec = cfg.decoder(cfg.timing["ccbr"])
    base_spec = DecoderSpec.from_dict(cfg.timing["baseline"])
    if len(base_spec.grid) < 12:
        raise ConfigError(f"baseline grid has {len(base_spec.grid)} points; at least 12 are required")
    repeats = max(1, int(cfg.timing.get("repeats", 1)))
    data = prepare_data(cfg, dataset)
    records = []
    folds = _folds(cfg, data)
    for fold in folds:
        access = RowAccess(data, fold.fold_index, access_log)
        for spec in (ccbr_spec, base_spec):
            best = None
            for _ in range(repeats):
                rec = run_cell(spec, {}, fold, access, cfg.features)
                if best is None or (
                    rec["status"] == "ok" and rec["timing"]["fit_wall_time"] < best["timing"]["fit_wall_time"]
                ):
                    best = rec
            best["metrics"] = None if best["metrics"] is None else {**best["metrics"], "grid_size": len(spec.grid)}
            records.append(best)

    def total(name):
        rs = [r for r in records if r["decoder"] == name and r["status"] == "ok"]
        return sum(r["timing"]["fit_wall_time"] for r in rs), [r["metrics"]["r2_mean"] for r in rs]

    t_ccbr, r_ccbr = total(ccbr_spec.name)
    t_grid, r_grid = total(base_spec.name)
    summary = {
        "ccbr_total": t_ccbr,
        "grid_total": t_grid,
        "grid_size": len(base_spec.grid),
        "grid_per_point": t_grid / (len(base_spec.grid) * max(1, len(r_grid))) if r_grid else None,
        "ratio": t_grid / t_ccbr if t_ccbr > 0 and r_grid else None,
        "ccbr_r2_mean": float(np.mean(r_ccbr)) if r_ccbr else None,
        "grid_r2_mean": float(np.mean(r_grid)) if r_grid else None,
        "n_folds": len(folds),
    }
    return _report("timing", cfg, records, timing=summary)
