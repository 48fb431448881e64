import csv
import io
import json
import subprocess
import sys

import pytest

from smoothlearn import ConfigError, ExperimentConfig, run_experiment
from smoothlearn.cli import bounds_table, main
from smoothlearn.experiments import COLUMNS, EXPERIMENTS, emit_report, loglog_slope, rows_to_csv


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_sandwich_row_carries_floor_and_ceiling(tmp_path):
    rows = run_experiment(ExperimentConfig("sandwich2q", q=[1.5], out=str(tmp_path)))
    (row,) = rows
    assert row.floor == pytest.approx(0.199026692033641, rel=1e-12)
    assert row.ceiling == 2.0
    assert row.measured_loss <= 2.0 and row.passed
    on_disk = read_rows(tmp_path / "sandwich2q.csv")
    assert list(on_disk[0]) == list(COLUMNS)


def test_grid_experiment_meets_its_floor():
    (row,) = run_experiment(ExperimentConfig("grid", n=[8], d=[2], p=[1.0]))
    assert row.measured_loss >= 4.0 and row.passed


def test_bounded_budget_slope(tmp_path):
    rows = run_experiment(ExperimentConfig("boundedm", out=str(tmp_path)))
    slope = [r for r in rows if r.experiment == "boundedm_slope"]
    assert len(slope) == 1
    assert 0.4 <= slope[0].measured_loss <= 0.6
    assert all(r.passed for r in rows)


def test_same_config_gives_identical_files(tmp_path):
    for sub in ("a", "b"):
        run_experiment(ExperimentConfig("holder", replicates=2, seed=7, out=str(tmp_path / sub), transcripts=True))
    assert (tmp_path / "a" / "holder.csv").read_bytes() == (tmp_path / "b" / "holder.csv").read_bytes()
    ta = sorted(p.name for p in (tmp_path / "a" / "transcripts").iterdir())
    assert ta and ta == sorted(p.name for p in (tmp_path / "b" / "transcripts").iterdir())
    for name in ta:
        assert (tmp_path / "a" / "transcripts" / name).read_bytes() == (tmp_path / "b" / "transcripts" / name).read_bytes()


def test_different_seeds_differ():
    a = run_experiment(ExperimentConfig("sandwich2q", seed=1))
    b = run_experiment(ExperimentConfig("sandwich2q", seed=2))
    assert a[0].measured_loss != b[0].measured_loss


def test_replicates_give_one_row_each():
    rows = run_experiment(ExperimentConfig("exp", epsilon=[0.5], replicates=3))
    assert [r.replicate for r in rows] == [0, 1, 2]


def test_rows_are_sorted_by_parameters_then_replicate():
    rows = run_experiment(ExperimentConfig("exp", epsilon=[0.5, 0.01, 0.1], replicates=2))
    assert [(r.epsilon, r.replicate) for r in rows] == [
        (0.01, 0), (0.01, 1), (0.1, 0), (0.1, 1), (0.5, 0), (0.5, 1)
    ]


def test_unset_axis_falls_back_to_experiment_defaults():
    assert [pt["epsilon"] for pt in ExperimentConfig("exp").grid()] == [0.01, 0.1, 0.5]


def test_no_rows_is_an_error(tmp_path):
    with pytest.raises(ConfigError):
        emit_report([], tmp_path, "exp")


def test_grid_without_defaults_is_rejected(monkeypatch):
    spec = EXPERIMENTS["exp"]
    monkeypatch.setitem(EXPERIMENTS, "exp", spec.__class__(spec.run, spec.axes, {}, spec.description))
    with pytest.raises(ConfigError, match="epsilon"):
        ExperimentConfig("exp").grid()


def test_unknown_names_are_rejected():
    with pytest.raises(ConfigError, match="experiment"):
        ExperimentConfig("theorem9")
    with pytest.raises(ConfigError, match="colour"):
        ExperimentConfig.from_dict({"experiment": "exp", "colour": "red"})
    with pytest.raises(ConfigError, match="replicates"):
        ExperimentConfig("exp", replicates=0)


def test_csv_formatting():
    rows = run_experiment(ExperimentConfig("lift", d=[2], p=[2.0]))
    text = rows_to_csv(rows)
    header, line = text.strip().split("\n")
    assert header == ",".join(COLUMNS)
    fields = next(csv.reader(io.StringIO(line)))
    assert fields[0] == "lift" and fields[-1] == "true"


def test_loglog_slope_recovers_power_law():
    xs = [1, 2, 4, 8]
    assert loglog_slope(xs, [3 * x**0.5 for x in xs]) == pytest.approx(0.5)


# -- command line ----------------------------------------------------------------------


def test_cli_run_writes_csv_and_exits_zero(tmp_path, capsys):
    code = main(["run", "pqlow", "--p", "2", "--q", "1.1", "1.5", "1.9", "--out", str(tmp_path)])
    assert code == 0
    rows = read_rows(tmp_path / "pqlow.csv")
    assert [float(r["q"]) for r in rows] == [1.1, 1.5, 1.9]
    assert all(r["passed"] == "true" for r in rows)
    meta = json.loads((tmp_path / "pqlow.meta.json").read_text())
    assert meta["experiment"] == "pqlow" and meta["description"]


def test_cli_reads_config_file_and_flags_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "exp", "epsilon": [0.5, 0.1], "seed": 3}))
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--epsilon", "0.01", "--out", str(out)]) == 0
    rows = read_rows(out / "exp.csv")
    assert len(rows) == 1 and rows[0]["seed"] == "3"


def test_cli_out_defaults_to_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("SMOOTHLEARN_OUT", str(tmp_path))
    assert main(["run", "lift", "--d", "3"]) == 0
    assert (tmp_path / "lift.csv").exists()


def test_cli_prints_csv_without_output_directory(monkeypatch, capsys):
    monkeypatch.delenv("SMOOTHLEARN_OUT", raising=False)
    assert main(["run", "exp", "--epsilon", "0.5"]) == 0
    out = capsys.readouterr().out
    assert out.startswith(",".join(COLUMNS))


def test_cli_config_errors_exit_two(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"experiment": "exp", "temperature": 3}))
    assert main(["run", "--config", str(cfg)]) == 2
    assert "temperature" in capsys.readouterr().err


def test_cli_failing_rows_give_nonzero_exit(tmp_path, monkeypatch):
    import smoothlearn.cli as cli

    def failing(cfg):
        rows = run_experiment(cfg)
        rows[0].passed = False
        return rows

    monkeypatch.setattr(cli, "run_experiment", failing)
    assert main(["run", "exp", "--epsilon", "0.5", "--out", str(tmp_path)]) == 1


def test_bounds_table_marks_open_regions_unknown():
    text = bounds_table(["2qup", "nnupper", "pq_exact"], [3.0], [1.5, 2.5], [2], [None])
    rows = list(csv.DictReader(io.StringIO(text)))
    got = {(r["name"], r["q"]): r["value"] for r in rows}
    assert got[("2qup", "1.5")] == "2.0"
    assert got[("2qup", "2.5")] == "unknown"
    assert got[("nnupper", "1.5")] == "48.0"
    assert got[("pq_exact", "1.5")] == "unknown"
    assert got[("pq_exact", "2.5")] == "1.0"


def test_bounds_subcommand_via_module(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "smoothlearn", "bounds", "--names", "2qlow", "--q", "1.5", "inf"],
        capture_output=True,
        text=True,
        check=True,
    )
    lines = res.stdout.strip().split("\n")
    assert lines[0] == "name,p,q,d,m,kind,value"
    assert lines[1].endswith("lower,0.19902669203364113") or "0.1990266920336" in lines[1]
    assert lines[2].endswith(",unknown")
