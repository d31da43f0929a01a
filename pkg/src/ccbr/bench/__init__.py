"""Benchmark harness: evaluation, sweeps, timing comparison, reports."""

from .config import SCHEMA_VERSION, BenchConfig, DecoderSpec, grid_points, load_config
from .harness import (
    RowAccess,
    aggregate,
    compare_training_time,
    metrics_section,
    prepare_data,
    run_benchmark,
    run_sweep,
    sweep_robustness,
    write_report,
)
from .plotdata import PLOT_KINDS, emit_plot_data, read_plot_csv

__all__ = [
    "PLOT_KINDS",
    "SCHEMA_VERSION",
    "BenchConfig",
    "DecoderSpec",
    "RowAccess",
    "aggregate",
    "compare_training_time",
    "emit_plot_data",
    "grid_points",
    "load_config",
    "metrics_section",
    "prepare_data",
    "read_plot_csv",
    "run_benchmark",
    "run_sweep",
    "sweep_robustness",
    "write_report",
]
