"""``bench`` command line: run | sweep | timing | synth | plotdata | features.

Exit codes: 0 success, 2 configuration error, 3 every evaluated cell failed.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..data import SynthConfig, generate_synthetic, save_dataset
from ..errors import CCBRError, ConfigError, LoadError, ParseError, SchemaError, ValidationError
from .config import SCHEMA_VERSION, BenchConfig, load_config
from .harness import (
    all_failed,
    compare_training_time,
    prepare_data,
    run_benchmark,
    run_sweep,
    sweep_robustness,
    write_report,
)
from .plotdata import PLOT_KINDS, emit_plot_data

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ALL_FAILED = 3

log = logging.getLogger("ccbr.bench")


def _out_dir(cfg, override):
    return Path(override) if override else Path(cfg.output_dir)


def _finish(report, out_dir, stem):
    jpath, cpath = write_report(report, out_dir, stem)
    print(f"wrote {jpath}")
    print(f"wrote {cpath}")
    for a in report["aggregates"]:
        m = a["metrics"]
        label = a["decoder"] + (f" {json.dumps(a['point'], sort_keys=True)}" if a["point"] else "")
        if m is None:
            print(f"{label}: all {a['n_error']} folds failed")
        else:
            print(f"{label}: R2 {m['r2_mean']:.4f} ± {m['r2_std']:.4f} ({a['n_ok']} folds)")
    if all_failed(report):
        log.error("every cell failed")
        return EXIT_ALL_FAILED
    return EXIT_OK


def cmd_run(args):
    cfg = load_config(args.config)
    return _finish(run_benchmark(cfg), _out_dir(cfg, args.out), "report_run")


def cmd_sweep(args):
    cfg = load_config(args.config)
    if args.grid == "robustness":
        report = sweep_robustness(cfg)
    else:
        report = run_sweep(cfg, cfg.sweep(args.grid), args.grid)
    code = _finish(report, _out_dir(cfg, args.out), f"report_sweep_{args.grid}")
    for name, s in report["spread"].items():
        print(f"{name}: spread of fold-mean R2 {s['fold_mean_spread']:.4f}, max per-fold spread {s['max_fold_spread']:.4f}")
    return code


def cmd_timing(args):
    cfg = load_config(args.config)
    report = compare_training_time(cfg)
    code = _finish(report, _out_dir(cfg, args.out), "report_timing")
    t = report["timing"]
    if t["ratio"] is not None:
        print(f"ccbr {t['ccbr_total']:.2f} s, {t['grid_size']}-point grid {t['grid_total']:.2f} s, ratio {t['ratio']:.2f}")
    return code


def _synth_config(path):
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(d, dict) and "dataset" in d:
        synth = BenchConfig.from_dict(d, base_dir=Path(path).parent).synth
        if synth is None:
            raise ConfigError("config dataset is not synthetic")
        return synth
    if not isinstance(d, dict) or d.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"synth config needs schema_version {SCHEMA_VERSION}")
    return SynthConfig.from_dict({k: v for k, v in d.items() if k != "schema_version"})


def cmd_synth(args):
    try:
        synth = _synth_config(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {args.config}: {exc}") from exc
    ds = generate_synthetic(synth)
    save_dataset(ds, args.out)
    print(f"wrote dataset to {args.out} ({ds.n_units} units, {ds.duration:g} s, {ds.spike_times.size} spikes)")
    return EXIT_OK


def cmd_plotdata(args):
    try:
        report = json.loads(Path(args.report).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read report {args.report}: {exc}") from exc
    out = args.out or str(Path(args.report).with_name(f"{Path(args.report).stem}_{args.kind}.csv"))
    emit_plot_data(report, args.kind, out)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_features(args):
    cfg = load_config(args.config)
    data = prepare_data(cfg)
    t = np.arange(data.n_rows) * float(cfg.features["bin_width"])
    header = "t," + ",".join(f"f{i}" for i in range(data.x.shape[1]))
    np.savetxt(args.out, np.column_stack([t, data.x]), delimiter=",", header=header, comments="", fmt="%.17g")
    print(f"wrote {args.out} ({data.n_rows} rows × {data.x.shape[1]} features)")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="bench", description="CCBR decoding benchmark harness")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run", help="cross-validated evaluation of every decoder")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output directory (default: config output_dir)")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="full-factorial sweep over a named grid")
    s.add_argument("--config", required=True)
    s.add_argument("--grid", required=True, help="name of a grid in the config's 'sweeps'")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("timing", help="CCBR single fit vs baseline grid search")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_timing)

    s = sub.add_parser("synth", help="write a synthetic dataset directory")
    s.add_argument("--config", required=True, help="bench config with dataset.synth, or a bare synth config")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("plotdata", help="plot-ready CSV from a report")
    s.add_argument("--report", required=True)
    s.add_argument("--kind", required=True, choices=PLOT_KINDS)
    s.add_argument("--out", help="CSV path (default: next to the report)")
    s.set_defaults(func=cmd_plotdata)

    s = sub.add_parser("features", help="dump the feature matrix as CSV for debugging")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_features)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, LoadError, ParseError, ValidationError, SchemaError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CCBRError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ALL_FAILED


if __name__ == "__main__":
    sys.exit(main())
