"""`bench` command line: subcommands, outputs and exit codes."""

import copy
import json
import shutil
import subprocess

import pytest

from ccbr.bench.cli import EXIT_ALL_FAILED, EXIT_CONFIG, EXIT_OK, main
from ccbr.data import load_dataset

TINY = {
    "schema_version": 1,
    "dataset": {"synth": {"n_units": 12, "duration": 40.0, "noise_seed": 2}},
    "features": {"bin_width": 0.05, "lags_before": 1},
    "decoders": [
        {"name": "ccbr", "kind": "ccbr", "config": {"QL": 8, "pc_selector": 4}},
        {"name": "wf", "kind": "wiener", "ridge": [0.0, 10.0]},
    ],
    "folds": {"n_folds": 4, "val_fraction": 0.1},
    "sweeps": {"qc": {"C": [0.1, 1.0, 10.0], "QL": [4, 8, 16, 32]}, "one": {"QL": [8]}},
    "timing": {"baseline": {"kind": "wiener_cascade", "ridge": [0.1, 1.0, 10.0, 100.0], "degree": [1, 2, 3]}},
    "seed": 0,
}


def write_config(tmp_path, doc=None, name="cfg.json", **over):
    d = copy.deepcopy(TINY if doc is None else doc)
    d.update(over)
    path = tmp_path / name
    path.write_text(json.dumps(d))
    return path


class TestSuccess:
    def test_run(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == EXIT_OK
        report = json.loads((tmp_path / "out" / "report_run.json").read_text())
        assert report["schema_version"] == 1 and report["kind"] == "run"
        assert len(report["records"]) == 8
        assert (tmp_path / "out" / "report_run_records.csv").exists()
        assert "ccbr: R2" in capsys.readouterr().out

    def test_default_output_dir_is_relative_to_cwd(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        cfg = write_config(tmp_path, output_dir="here")
        assert main(["run", "--config", str(cfg)]) == EXIT_OK
        assert (tmp_path / "here" / "report_run.json").exists()

    def test_sweep_then_plotdata(self, tmp_path, capsys):
        cfg = write_config(tmp_path, folds={"n_folds": 4, "use": [1]})
        assert main(["sweep", "--config", str(cfg), "--grid", "qc", "--out", str(tmp_path)]) == EXIT_OK
        assert "spread of fold-mean R2" in capsys.readouterr().out
        report = tmp_path / "report_sweep_qc.json"
        assert main(["plotdata", "--report", str(report), "--kind", "sweep_heatmap"]) == EXIT_OK
        lines = [ln for ln in (tmp_path / "report_sweep_qc_sweep_heatmap.csv").read_text().splitlines() if not ln.startswith("#")]
        assert lines[0] == "C,QL,r2_mean,r2_std" and len(lines) == 13

    def test_timing(self, tmp_path, capsys):
        cfg = write_config(tmp_path, folds={"n_folds": 4, "use": [0]})
        assert main(["timing", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
        t = json.loads((tmp_path / "report_timing.json").read_text())["timing"]
        assert t["grid_size"] == 12 and t["ratio"] > 0
        assert "ratio" in capsys.readouterr().out

    def test_synth_from_bench_config(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "ds")]) == EXIT_OK
        ds = load_dataset(tmp_path / "ds")
        assert ds.n_units == 12 and ds.duration == 40.0

    def test_synth_from_bare_config(self, tmp_path):
        cfg = write_config(tmp_path, {"schema_version": 1, "n_units": 5, "duration": 10.0})
        assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "ds")]) == EXIT_OK
        assert load_dataset(tmp_path / "ds").n_units == 5

    def test_run_on_dataset_path(self, tmp_path):
        assert main(["synth", "--config", str(write_config(tmp_path)), "--out", str(tmp_path / "ds")]) == EXIT_OK
        cfg = write_config(tmp_path, dataset={"path": "ds"}, name="disk.json")
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK

    def test_features_dump(self, tmp_path):
        cfg = write_config(tmp_path)
        assert main(["features", "--config", str(cfg), "--out", str(tmp_path / "f.csv")]) == EXIT_OK
        header = (tmp_path / "f.csv").read_text().splitlines()[0]
        assert header.startswith("t,f0,") and header.count(",") == 12 * 2

    def test_help(self, capsys):
        assert main(["--help"]) == EXIT_OK

    @pytest.mark.skipif(shutil.which("bench") is None, reason="console script not on PATH")
    def test_console_script(self, tmp_path):
        cfg = write_config(tmp_path, schema_version=7)
        proc = subprocess.run(["bench", "run", "--config", str(cfg)], capture_output=True, text=True)
        assert proc.returncode == EXIT_CONFIG
        assert "schema_version" in proc.stderr


class TestConfigErrors:
    @pytest.mark.parametrize(
        "over",
        [
            {"schema_version": 2},
            {"decoders": []},
            {"decoders": [{"kind": "lstm"}]},
            {"features": {"source_kind": "band_power"}},
            {"timing": {"baseline": {"kind": "wiener_cascade", "ridge": [1.0], "degree": [1]}}},
        ],
    )
    def test_bad_config_exit_2(self, tmp_path, over, capsys):
        cfg = write_config(tmp_path, **over)
        assert main(["run", "--config", str(cfg)]) == EXIT_CONFIG
        assert "configuration error" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.json")]) == EXIT_CONFIG

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["run", "--config", str(path)]) == EXIT_CONFIG

    def test_unknown_grid(self, tmp_path):
        assert main(["sweep", "--config", str(write_config(tmp_path)), "--grid", "zzz"]) == EXIT_CONFIG

    def test_timing_without_section(self, tmp_path):
        d = copy.deepcopy(TINY)
        del d["timing"]
        assert main(["timing", "--config", str(write_config(tmp_path, d))]) == EXIT_CONFIG

    @pytest.mark.parametrize(
        "argv", [[], ["frobnicate"], ["run"], ["plotdata", "--report", "r.json", "--kind", "pie"]]
    )
    def test_argparse_errors(self, argv):
        assert main(argv) == EXIT_CONFIG

    def test_plotdata_missing_field(self, tmp_path):
        path = tmp_path / "r.json"
        path.write_text(json.dumps({"schema_version": 1, "aggregates": [{"decoder": "x"}]}))
        assert main(["plotdata", "--report", str(path), "--kind", "r2_bars"]) == EXIT_CONFIG

    def test_bare_synth_without_version(self, tmp_path):
        cfg = write_config(tmp_path, {"n_units": 5})
        assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "ds")]) == EXIT_CONFIG


class TestAllFailed:
    def test_every_cell_failing_exits_3(self, tmp_path, capsys):
        bad = [{"name": "bad", "kind": "ccbr", "config": {"QL": 8, "pc_selector": 5000}}]
        cfg = write_config(tmp_path, decoders=bad)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_ALL_FAILED
        report = json.loads((tmp_path / "report_run.json").read_text())
        assert all(r["status"] == "error" for r in report["records"])
        assert "all 4 folds failed" in capsys.readouterr().out

    def test_partial_failure_exits_0(self, tmp_path):
        decoders = [{"name": "bad", "kind": "ccbr", "config": {"QL": 8, "pc_selector": 5000}}, TINY["decoders"][1]]
        cfg = write_config(tmp_path, decoders=decoders)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
