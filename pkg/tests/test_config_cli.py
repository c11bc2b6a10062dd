import csv
import json

import pytest

from p2pmatch.cli import main
from p2pmatch.config import RunConfig, parse_config, parse_grid
from p2pmatch.errors import InvalidConfig


def test_parse_config():
    cfg = parse_config("""
        # comment
        excess_ratio = 0.3
        capacity=2   # trailing
        prune = false
        zone_weights = 1,2,3,4
        n_zones = 4
        v_max_kmh = none
    """)
    assert cfg.excess_ratio == 0.3 and cfg.capacity == 2 and cfg.prune is False
    assert cfg.zone_weights == [1.0, 2.0, 3.0, 4.0] and cfg.v_max_kmh is None


@pytest.mark.parametrize("text", ["nonsense=1", "capacity=two", "capacity", "capacity=0",
                                  "excess_ratio=-1", "combo_mode=best"])
def test_bad_config(text):
    with pytest.raises(InvalidConfig):
        parse_config(text)


def test_parse_grid():
    g = parse_grid("excess_ratio=0.2,1.0\nsupply_ratio=0.25, 0.5\ncapacity=1,4")
    assert g == {"excess_ratio": [0.2, 1.0], "supply_ratio": [0.25, 0.5], "capacity": [1, 4]}
    with pytest.raises(InvalidConfig):
        parse_grid("# nothing\n")


def test_replace_validates():
    with pytest.raises(InvalidConfig):
        RunConfig().replace(batch_window_s=0)


@pytest.fixture
def cfgfile(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("grid_rows=6\ngrid_cols=6\nn_drivers=12\nn_passengers=24\nbatch_window_s=600\n")
    return p


def read_csv(p):
    with open(p, newline="") as f:
        return list(csv.reader(f))


def test_cli_end_to_end(tmp_path, cfgfile, capsys):
    inst = tmp_path / "inst"
    assert main(["gen", "--config", str(cfgfile), "--out", str(inst), "--seed", "3"]) == 0
    for name in ("nodes.csv", "links.csv", "drivers.csv", "passengers.csv"):
        assert (inst / name).exists()
    args = ["match", "--config", str(cfgfile), "--network", str(inst), "--drivers",
            str(inst / "drivers.csv"), "--passengers", str(inst / "passengers.csv")]
    assert main(args + ["--out", str(tmp_path / "a"), "--candidates"]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--no-prune"]) == 0
    assert read_csv(tmp_path / "a" / "matches.csv") == read_csv(tmp_path / "b" / "matches.csv")
    metrics = json.loads((tmp_path / "a" / "metrics.json").read_text())
    assert {"vehicle_trips", "vkt_km", "vht_h", "deltas_pct"} <= set(metrics)
    assert read_csv(tmp_path / "a" / "runtimes.csv")[0] == ["stage", "seconds", "combination_count"]
    assert (tmp_path / "a" / "candidates.csv").exists()
    assert main(args + ["--out", str(tmp_path / "c"), "--greedy-combos", "--greedy-assign"]) == 0
    greedy = json.loads((tmp_path / "c" / "metrics.json").read_text())
    assert greedy["vkt_km"] >= metrics["vkt_km"] - 1e-9

    out = tmp_path / "sim"
    assert main(["simulate", "--config", str(cfgfile), "--replications", "2", "--out", str(out)]) == 0
    assert len(read_csv(out / "replications.csv")) == 3
    assert json.loads((out / "metrics.json").read_text())["replications"] == 2

    grid = tmp_path / "grid.txt"
    grid.write_text("excess_ratio=0.2,1.0\n")
    assert main(["sweep", "--config", str(cfgfile), "--grid", str(grid), "--replications", "2",
                 "--out", str(out)]) == 0
    rows = read_csv(out / "sweep.csv")
    assert rows[0] == ["cell_params", "mean_vkt_saving_pct", "stdev"] and len(rows) == 3
    capsys.readouterr()


def test_cli_reports_errors(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("capacity=-3\n")
    assert main(["gen", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "capacity" in capsys.readouterr().err
