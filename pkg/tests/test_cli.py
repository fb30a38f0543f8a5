import csv
import json
import os
import struct

import numpy as np
import pytest

from trlsim.cli import ConfigError, build_parser, main, parse_range
from trlsim.geometry import read_stl

COMMANDS = ["sll-analyze", "trl-sweep", "grasp-predict", "mesh-export", "validate"]


def _err(capsys):
    lines = capsys.readouterr().err.strip().splitlines()
    return json.loads(lines[-1])


def test_parse_range():
    assert parse_range("0.3:1.0:0.1") == pytest.approx([0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    assert parse_range("2:30", integer=True) == list(range(2, 31))
    assert parse_range("2,5,7,30", integer=True) == [2, 5, 7, 30]
    assert parse_range("7:7", integer=True) == [7]
    with pytest.raises(ConfigError):
        parse_range("1:2:0")


@pytest.mark.parametrize("cmd", COMMANDS)
def test_help_lists_units(cmd, capsys):
    assert main([cmd, "--help"]) == 0
    text = capsys.readouterr().out
    parser = build_parser()
    sub = parser._subparsers._group_actions[0].choices[cmd]
    for action in sub._actions:
        if action.type in (float, int):
            assert "[" in (action.help or ""), f"{cmd} {action.option_strings} lacks units"
    assert "[mm]" in text or "[N]" in text


def test_sll_analyze_writes_reports(tmp_path):
    assert main(["sll-analyze", "--thickness", "1.0", "--tolerance", "0.05", "--output-dir", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "sll_analysis.csv")))
    assert len(rows) == 1
    assert float(rows[0]["analytic_in_plane_mm"]) == pytest.approx(1.75)
    assert float(rows[0]["in_plane_dev_pct"]) == pytest.approx(
        100 * (float(rows[0]["fea_in_plane_mm"]) / 1.75 - 1))
    assert (tmp_path / "sll_analysis.json").exists()
    meta = json.loads((tmp_path / "sll-analyze.meta.json").read_text())
    assert meta["command"] == "sll-analyze"


def test_sll_analyze_zero_force(tmp_path):
    assert main(["sll-analyze", "--thickness", "1.0", "--force", "0", "--tolerance", "0.05",
                 "--output-dir", str(tmp_path)]) == 0
    row = next(csv.DictReader(open(tmp_path / "sll_analysis.csv")))
    assert float(row["fea_in_plane_mm"]) == 0.0


def test_sll_analyze_bad_thickness(tmp_path, capsys):
    assert main(["sll-analyze", "--thickness", "-1", "--output-dir", str(tmp_path)]) == 2
    assert _err(capsys)["exit_code"] == 2


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["trl-sweep", "--triangles", "7:7", "--tolerance", "0.1", "--output-dir", str(d)]) == 0
    for name in ("trl_sweep.csv", "trl_sweep.json", "trl_in_plane.svg", "trl_angular.svg", "trl_report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_trl_sweep_single_point_declines_shape(tmp_path):
    assert main(["trl-sweep", "--triangles", "7:7", "--tolerance", "0.1", "--output-dir", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "trl_report.json").read_text())
    assert "declined" in rep["shape"]
    assert set(rep["selection"]) == {"MaxInPlane", "MaxTorsionResistance", "CyclicLife"}
    rows = list(csv.reader(open(tmp_path / "trl_sweep.csv")))
    assert len(rows) == 2


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("TRLSIM_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["sll-analyze", "--thickness", "1.0", "--tolerance", "0.1"]) == 0
    assert (tmp_path / "env" / "sll_analysis.csv").exists()


def test_grasp_predict_preset(capsys):
    assert main(["grasp-predict", "--preset", "trl-fit", "--x", "1"]) == 0
    out = capsys.readouterr()
    rep = json.loads(out.out)["report"]
    assert rep["capacity_N"] == pytest.approx(1.18, abs=0.005)
    assert rep["governing_mode"] == "Twist"
    assert "Twist" in out.err


def test_grasp_predict_feasibility(capsys):
    assert main(["grasp-predict", "--mass", "250", "--gripper", "trl"]) == 0
    assert json.loads(capsys.readouterr().out)["feasibility"]["verdict"] == "Feasible"


def test_grasp_predict_errors(capsys):
    assert main(["grasp-predict", "--preset", "trl-fit", "--x", "1", "--r", "0"]) == 2
    capsys.readouterr()
    assert main(["grasp-predict", "--r", "15", "--x", "1"]) == 2
    msg = _err(capsys)["message"]
    assert "--fn" in msg and "--kappa" in msg


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"normal_force_N": 3, "contact_radius_mm": 15, "kappa_Nmm_per_rad": 265.5,
                               "allowed_sag_mm": 1}))
    assert main(["grasp-predict", "--config", str(cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["report"]["capacity_N"] == pytest.approx(1.18, abs=0.005)
    assert main(["grasp-predict", "--config", str(cfg), "--x", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["report"]["capacity_N"] == pytest.approx(2.36, abs=0.01)
    cfg.write_text(json.dumps({"radius": 15}))
    assert main(["grasp-predict", "--config", str(cfg)]) == 2


def test_mesh_export(tmp_path, capsys):
    out = tmp_path / "trl2.stl"
    assert main(["mesh-export", "--triangles", "2", "--target-edge", "4", "--out", str(out)]) == 0
    data = out.read_bytes()
    (n,) = struct.unpack_from("<I", data, 80)
    assert len(data) == 84 + 50 * n
    assert str(n) in capsys.readouterr().out
    _, tris = read_stl(data)
    # spike tips sit half the extrude beyond the apex line
    deepest = tris.reshape(-1, 3)[:, 2].min()
    tips = np.unique(np.round(tris.reshape(-1, 3)[np.isclose(tris.reshape(-1, 3)[:, 2], deepest), 0], 3))
    assert np.all((np.abs(tips - 25) < 1.0) | (np.abs(tips - 75) < 1.0))


def test_mesh_export_unwritable(capsys):
    assert main(["mesh-export", "--triangles", "2", "--out", "/proc/nope/trl.stl"]) == 4
    assert _err(capsys)["exit_code"] == 4


def test_validate(tmp_path, capsys):
    assert main(["validate", "--triangles", "5", "--target-edge", "4"]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nodes": [[0, 0, 0], [1, 0, 0], [1, 0, 0]], "elements": [[0, 1, 2]],
                               "node_sets": {"fixed_edge": [0], "load_edge": [1]}}))
    capsys.readouterr()
    assert main(["validate", "--mesh-json", str(bad)]) == 2
    assert "zero_area" in capsys.readouterr().out + capsys.readouterr().err


def test_unknown_command():
    assert main(["frobnicate"]) == 2
