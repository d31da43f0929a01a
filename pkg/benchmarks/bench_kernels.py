"""Numba kernels vs their numpy twins, plus one end-to-end CCBR fit per path.

Usage::

    python benchmarks/bench_kernels.py [--repeats 5] [--json out.json] [--no-e2e]

Each kernel is timed on both paths with the same input (the best of
``--repeats`` runs, after one untimed warm-up that also triggers numba
compilation) and the outputs are compared. The end-to-end figure runs a
CCBR fit in two subprocesses, one with ``CCBR_DISABLE_NUMBA=1``.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from ccbr import kernels as K
from ccbr._accel import HAVE_NUMBA


def _cases(rng):
    a = rng.standard_normal((120, 120))
    cov = a @ a.T / 120
    sos = np.array([[0.2, 0.4, 0.2, 1.0, -0.5, 0.2], [1.0, -2.0, 1.0, 1.0, -1.6, 0.7]])
    sig = rng.standard_normal((4, 200_000))
    trace = rng.standard_normal(500_000)
    xs = rng.standard_normal((3000, 20))
    ys = rng.integers(0, 8, 3000)
    xd, cents = rng.standard_normal((5000, 30)), rng.standard_normal((32, 30))
    xv = rng.standard_normal((2000, 40))
    yv = np.where(xv[:, 0] + 0.3 * rng.standard_normal(2000) > 0, 1.0, -1.0)
    order = np.arange(2000, dtype=np.int64)
    z = rng.standard_normal((20_000, 32))
    labels = rng.integers(0, 32, 20_000)
    return [
        ("jacobi_eigh 120x120", K.jacobi_eigh_nb, K.jacobi_eigh_np, (cov, 1e-12, 100)),
        ("sosfilt 4x200k", K.sosfilt_nb, K.sosfilt_np, (sos, sig)),
        ("threshold_crossings 500k", K.threshold_crossings_nb, K.threshold_crossings_np, (trace, -1.5, 10)),
        ("best_axis_split 3000x20", K.best_axis_split_nb, K.best_axis_split_np, (xs, ys, 8, 5)),
        ("l1_distances 5000x32", K.l1_distances_nb, K.l1_distances_np, (xd, cents)),
        ("svm_dual_cd 2000x40", K.svm_dual_cd_nb, K.svm_dual_cd_np, (xv, yv, 1.0, 1e-4, 1000, order)),
        ("softmax_residual 20000x32", K.softmax_residual_nb, K.softmax_residual_np, (z, labels)),
    ]


def _copy_args(args):
    return tuple(a.copy() if isinstance(a, np.ndarray) else a for a in args)


def _best(fn, args, repeats):
    best, out = np.inf, None
    for _ in range(repeats):
        fresh = _copy_args(args)  # softmax_residual works in place
        t0 = time.perf_counter()
        out = fn(*fresh)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _max_diff(a, b):
    if isinstance(a, tuple):
        return max(_max_diff(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        return np.inf
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def bench_kernels(repeats):
    rng = np.random.default_rng(0)
    rows = []
    for name, nb, np_, args in _cases(rng):
        nb(*_copy_args(args))  # compile / warm caches
        np_(*_copy_args(args))
        t_nb, out_nb = _best(nb, args, repeats)
        t_np, out_np = _best(np_, args, repeats)
        rows.append({"kernel": name, "numba_s": t_nb, "numpy_s": t_np, "speedup": t_np / t_nb, "max_abs_diff": _max_diff(out_nb, out_np)})
    return rows


E2E_SNIPPET = """
import time
from ccbr._accel import backend_name
from ccbr.data import SynthConfig, generate_synthetic, bin_kinematics, make_folds
from ccbr.decode import CCBRConfig, ccbr_fit
from ccbr.features import bin_spike_counts, lag_embed, trim_target
ds = generate_synthetic(SynthConfig(n_units=60, duration=300.0, noise_seed=0))
x = lag_embed(bin_spike_counts(ds, 0.05), 10, 0).values
y = trim_target(bin_kinematics(ds, 0.05), 10, 0)
fold = make_folds(x.shape[0], 10, 0.1)[0]
cfg = CCBRConfig(QL=32, pc_selector=20)
ccbr_fit(x[:2000], y[:2000], make_folds(2000, 5, 0.1)[0], cfg)  # warm-up
t0 = time.perf_counter()
ccbr_fit(x, y, fold, cfg)
print(backend_name(), time.perf_counter() - t0)
"""


def bench_end_to_end():
    out = {}
    for disable in ("0", "1"):
        env = {**os.environ, "CCBR_DISABLE_NUMBA": disable}
        proc = subprocess.run([sys.executable, "-c", E2E_SNIPPET], env=env, capture_output=True, text=True, check=True)
        backend, seconds = proc.stdout.split()[-2:]
        out[backend] = float(seconds)
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--json", help="also write the results here")
    p.add_argument("--no-e2e", action="store_true", help="skip the end-to-end CCBR fit")
    args = p.parse_args(argv)
    if not HAVE_NUMBA:
        print("numba is not importable; nothing to compare", file=sys.stderr)
        return 1

    rows = bench_kernels(args.repeats)
    print(f"{'kernel':<28}{'numba s':>11}{'numpy s':>11}{'speedup':>9}{'max |diff|':>12}")
    for r in rows:
        print(f"{r['kernel']:<28}{r['numba_s']:>11.4f}{r['numpy_s']:>11.4f}{r['speedup']:>9.1f}{r['max_abs_diff']:>12.1e}")
    result = {"schema_version": 1, "repeats": args.repeats, "kernels": rows}
    if not args.no_e2e:
        e2e = bench_end_to_end()
        result["ccbr_fit_seconds"] = e2e
        print(f"\nCCBR fit (60 units, 300 s, 10 lags, QL=32, 20 PCs): numba {e2e['numba']:.2f} s, numpy {e2e['numpy']:.2f} s")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(result, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
