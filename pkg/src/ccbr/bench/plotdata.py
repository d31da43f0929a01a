"""Plot-ready CSV tables from benchmark reports."""

import csv
import io
from pathlib import Path

from ..errors import SchemaError

__all__ = ["PLOT_KINDS", "plot_rows", "emit_plot_data", "read_plot_csv"]

PLOT_KINDS = ("r2_bars", "runtime_bars", "sweep_heatmap")

_HEADERS = {
    "r2_bars": (
        "test R² per decoder across folds",
        [("decoder", "decoder name"), ("mean", "fold mean of r2_mean"), ("std", "population STD across folds"), ("n_folds", "successful folds")],
    ),
    "runtime_bars": (
        "fit wall time per decoder (seconds)",
        [("decoder", "decoder name"), ("mean", "mean fit_wall_time"), ("std", "population STD across folds"), ("n_folds", "successful folds")],
    ),
    "sweep_heatmap": (
        "test R² per sweep point",
        [("<params>", "one column per swept parameter"), ("r2_mean", "fold mean of r2_mean"), ("r2_std", "population STD across folds")],
    ),
}


def _need(d, key, where):
    if not isinstance(d, dict) or key not in d:
        raise SchemaError(f"report is missing field {where}{key!r}")
    return d[key]


def _ok_aggregates(report):
    aggs = _need(report, "aggregates", "")
    for i, a in enumerate(aggs):
        for k in ("decoder", "point", "metrics", "timing"):
            _need(a, k, f"aggregates[{i}].")
    return [a for a in aggs if a["metrics"] is not None]


def plot_rows(report, kind):
    """Column names and rows for ``kind``, in deterministic order."""
    if kind not in PLOT_KINDS:
        raise SchemaError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    aggs = _ok_aggregates(report)
    if kind == "r2_bars":
        rows = []
        for a in aggs:
            m = a["metrics"]
            rows.append([a["decoder"], _need(m, "r2_mean", "metrics."), _need(m, "r2_std", "metrics."), a["n_ok"]])
        return ["decoder", "mean", "std", "n_folds"], rows
    if kind == "runtime_bars":
        rows = []
        for a in aggs:
            t = a["timing"]
            rows.append([
                a["decoder"], _need(t, "fit_wall_time_mean", "timing."), _need(t, "fit_wall_time_std", "timing."), a["n_ok"],
            ])
        return ["decoder", "mean", "std", "n_folds"], rows
    grid = _need(report, "grid", "")
    params = list(grid)
    multi = len({a["decoder"] for a in aggs}) > 1
    cols = (["decoder"] if multi else []) + params + ["r2_mean", "r2_std"]
    rows = []
    for a in aggs:
        point = a["point"]
        for p in params:
            _need(point, p, "aggregates[].point.")
        rows.append(([a["decoder"]] if multi else []) + [point[p] for p in params] + [a["metrics"]["r2_mean"], a["metrics"]["r2_std"]])
    return cols, rows


def _fmt(v):
    return repr(float(v)) if isinstance(v, float) else str(v)


def emit_plot_data(report, kind, path=None):
    """Render ``kind`` as CSV text (also written to ``path`` when given).

    Lines starting with ``#`` describe the columns; floats are written with
    full precision so that parsing them back is exact.
    """
    cols, rows = plot_rows(report, kind)
    title, docs = _HEADERS[kind]
    buf = io.StringIO()
    buf.write(f"# {kind}: {title}\n")
    for name, doc in docs:
        buf.write(f"# {name}: {doc}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    text = buf.getvalue()
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_plot_csv(text):
    """Parse emitted CSV text into ``(columns, rows)`` of strings."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]
