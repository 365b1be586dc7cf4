import re

import pytest

from rfox.bench import ExperimentConfig, run_experiment
from rfox.instances import assign_fields, gen_erdos_renyi
from rfox.plots import PlotParseError, emit_plots
from rfox.schedule import ScheduleParams
from rfox.spectral import gap_profile


def test_gap_polylines(tmp_path):
    inst = assign_fields(gen_erdos_renyi(5, 0.8, 1), 2.0, 1)
    paths = []
    for d in ("RFOX", "X", "XX", "XplusSXX"):
        p = tmp_path / f"{d}.csv"
        gap_profile(d, inst, ScheduleParams(p=100)).to_csv(p, instance_id="inst")
        paths.append(p)
    out = emit_plots(paths, tmp_path / "svg")
    assert [o.name for o in out] == ["gap_inst.svg"]
    svg = out[0].read_text()
    assert svg.count("<polyline") == 4
    first = re.search(r'points="([^"]*)"', svg).group(1)
    assert len(first.split()) == 100


def test_summary_bars(tmp_path):
    cfg = ExperimentConfig(n_values=(4, 5, 6), field_ranges=(1.0, 3.0, 5.0),
                           instances_per_cell=1, schedule=ScheduleParams(p=5))
    run_experiment(cfg, tmp_path)
    out = emit_plots([tmp_path / "summary.csv"], tmp_path / "svg")
    assert len(out) == 3
    svg = out[0].read_text()
    assert svg.count("<g data-cell=") == 9
    assert svg.count("<rect x=") >= 9 * 4


def test_empty_csv(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("")
    with pytest.raises(PlotParseError, match="empty"):
        emit_plots([p], tmp_path / "svg")
    assert not (tmp_path / "svg").exists()


def test_malformed_line_number(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("# rfox-gap-profile v1 driver=X p=2 delta=0.001\n"
                 "k,s_or_t,E0,E1,gap\n0,0.0,-1,1,2\n1,0.5,-1,oops,x\n")
    with pytest.raises(PlotParseError, match=r"g\.csv:4"):
        emit_plots([p], tmp_path / "svg")
    p.write_text("# rfox-gap-profile v1\nk,s_or_t,E0,E1,gap\n0,0.0,-1\n")
    with pytest.raises(PlotParseError, match=r"g\.csv:3"):
        emit_plots([p], tmp_path / "svg")
    assert not (tmp_path / "svg").exists()
