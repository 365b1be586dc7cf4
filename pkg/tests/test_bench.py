import csv
import json
import math

import pytest

from rfox.bench import (ExperimentConfig, iter_instance_specs, make_instance, preset,
                        run_experiment, run_gap_study, run_single, with_overrides)
from rfox.errors import InvalidParameterError
from rfox.metrics import METRICS_COLUMNS
from rfox.pauli import field_phases
from rfox.schedule import Driver, ScheduleParams
from conftest import make_instance as build

SMALL = dict(n_values=(5,), field_ranges=(1.0, 3.0), instances_per_cell=2,
             schedule=ScheduleParams(p=20), master_seed=11)


def test_presets():
    er, ws = preset("er"), preset("ws")
    assert er.model_params == {"p_edge": 0.8} and er.instances_per_cell == 20
    assert ws.model_params == {"k": 6, "p_rewire": 0.7}
    assert preset("er", full=True).instances_per_cell == 150
    assert er.n_values == (7, 9, 12) and er.field_ranges == (1.0, 3.0, 5.0)
    assert er.schedule == ScheduleParams(delta=1e-3, p=100)


def test_config_roundtrip_and_validation():
    cfg = ExperimentConfig(**SMALL)
    assert ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(family="lattice")
    with pytest.raises(InvalidParameterError):
        ExperimentConfig(family="ws", model_params={"k": 4})
    with pytest.raises(InvalidParameterError):
        ExperimentConfig.from_dict({"nope": 1})
    cfg2 = with_overrides(cfg, p=7, master_seed=None, instances_per_cell=1)
    assert cfg2.schedule.p == 7 and cfg2.master_seed == 11 and cfg2.instances_per_cell == 1


def test_seeds_distinct_and_stable():
    cfg = ExperimentConfig(**SMALL)
    specs = list(iter_instance_specs(cfg))
    assert len(specs) == 4
    assert len({(s.graph_seed, s.field_seed) for s in specs}) == 4
    assert specs == list(iter_instance_specs(cfg))
    other = list(iter_instance_specs(with_overrides(cfg, master_seed=12)))
    assert other[0].graph_seed != specs[0].graph_seed


def test_no_edge_instance_winner_from_encoding():
    inst = build(3, [], (0.8, -0.6, 0.1), field_range=1.0)
    report, dist = run_single(inst, "RFOX", ScheduleParams(p=5))
    p1 = [math.sin(phi / 2) ** 2 for phi in field_phases(inst)]
    expected = "".join("1" if p > 0.5 else "0" for p in p1)
    assert report.winner == expected == "101"
    # with no couplings the encoding alone already aligns every spin with its field
    assert report.cost_difference == 0


def test_run_experiment_outputs(tmp_path):
    cfg = ExperimentConfig(**SMALL)
    res = run_experiment(cfg, tmp_path)
    lines = (tmp_path / "runs.csv").read_text().splitlines()
    assert lines[0] == "# rfox-runs v1"
    assert lines[1].split(",") == list(METRICS_COLUMNS)
    assert len(lines) == 2 + 4 * 4
    assert res.summary.rows_written == 16 and res.summary.failures == 0
    rows = list(csv.DictReader(lines[1:]))
    assert all(r["wall_time_ms"] == "" and r["shots"] == "exact" for r in rows)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert len(summary["cells"]) == 2 * 4
    assert set(summary["trends"]) == {d.value for d in Driver}
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["master_seed"] == 11 and len(manifest["seeds"]) == 4
    cell = res.summary.cell(5, 1.0, "RFOX")
    assert cell.completed == 2 and cell.median["cost_diff"] >= 0


def test_determinism(tmp_path):
    cfg = ExperimentConfig(**SMALL)
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    for name in ("runs.csv", "summary.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_failures_are_counted(tmp_path, monkeypatch):
    import rfox.bench as bench

    real = bench.run_single

    def flaky(instance, driver, *a, **k):
        if driver is Driver.XX:
            raise bench.NumericalError("boom")
        return real(instance, driver, *a, **k)

    monkeypatch.setattr(bench, "run_single", flaky)
    res = run_experiment(ExperimentConfig(**SMALL), tmp_path)
    assert res.summary.failures == 4 and res.summary.rows_written == 12
    assert res.summary.cell(5, 1.0, "XX").failed == 2
    assert len((tmp_path / "runs.csv").read_text().splitlines()) == 2 + 12


def test_finite_shots_reference(tmp_path):
    cfg = with_overrides(ExperimentConfig(**SMALL), shots=256, drivers=("RFOX",))
    res = run_experiment(cfg)
    assert all(r["shots"] == 256 for r in res.rows)
    assert all(0 < r["d_js"] < 1 for r in res.rows)


def test_gap_study(tmp_path):
    cfg = ExperimentConfig(n_values=(5,), field_ranges=(2.0,), instances_per_cell=2,
                           drivers=("RFOX", "XX"), schedule=ScheduleParams(p=20))
    study = run_gap_study(cfg, tmp_path)
    assert len(study.records) == 4 and study.compared == 2
    assert study.flatness_violations == 0
    assert len(list((tmp_path / "gaps").glob("*.csv"))) == 4
    text = (tmp_path / "gap_summary.csv").read_text().splitlines()
    assert text[0].startswith("# rfox-gap-summary v1")
    rfox = study.for_driver("RFOX")
    assert all(r.ratio_vs_rfox == 1.0 for r in rfox)


def test_gap_study_delta_zero():
    cfg = ExperimentConfig(n_values=(4,), field_ranges=(1.0,), instances_per_cell=1,
                           drivers=("RFOX",), schedule=ScheduleParams(delta=0.0, p=10))
    assert run_gap_study(cfg).records[0].spread == 0.0
