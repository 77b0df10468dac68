import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from levelflow import io as lfio
from levelflow.cli import EXIT_CODES, main
from levelflow.config import ExperimentConfig, OutputSpec
from levelflow.errors import ConfigInvalid
from levelflow.evolution import EvolutionParams
from levelflow.grid import ScalarField, make_grid
from levelflow.measures import extract_front
from levelflow.shapes import Sphere, init_field


def tiny_config(**overrides):
    base = dict(
        name="tiny",
        dim=2,
        extents=[[-1.0, 1.0], [-1.0, 1.0]],
        resolution=[48, 48],
        shape=Sphere(center=(0.0, 0.0), radius=0.6),
        evolution=EvolutionParams(cfl_factor=0.5, t_max=0.2, snapshot_stride=100),
        outputs=OutputSpec(time_series=True, arrival=True, analysis=True),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


@given(
    values=hnp.arrays(
        dtype=np.float64,
        shape=(9, 12),
        elements=st.floats(-1e6, 1e6, allow_nan=False),
    )
)
@settings(max_examples=20, deadline=None)
def test_field_round_trip_bitwise(tmp_path_factory, values):
    grid = make_grid(2, [[0.0, 2.0], [-2.0, 0.75]], [9, 12])
    path = tmp_path_factory.mktemp("io") / "f.lsmc"
    lfio.write_field(path, ScalarField(grid, values))
    back = lfio.read_field(path)
    assert back.grid == grid
    assert np.array_equal(back.values, values)


def test_field_format_layout(tmp_path):
    grid = make_grid(2, [[-1.0, 1.0], [-1.0, 1.0]], [8, 8])
    f = ScalarField(grid, np.arange(64, dtype=float).reshape(8, 8))
    path = tmp_path / "f.lsmc"
    lfio.write_field(path, f)
    raw = path.read_bytes()
    assert raw[:4] == b"LSMC"
    header = 4 + 4 + 4 + 8 + 16 + 8  # magic, version, dim, shape, origin, h
    assert len(raw) == header + 64 * 8
    # axis 0 fastest
    first = np.frombuffer(raw[header : header + 16], dtype="<f8")
    assert np.array_equal(first, f.values[:2, 0])


def test_mask_round_trip(tmp_path):
    mask = np.random.default_rng(0).random((6, 9)) > 0.5
    path = tmp_path / "m.mask"
    lfio.write_mask(path, mask)
    back = lfio.read_mask(path, (6, 9))
    assert np.array_equal(back, mask)


def test_timeseries_csv_format(tmp_path):
    rows = [(0.0, 1.5, 3.25, 1, 0.75), (0.125, 1.0, 2.5, 1, 0.5)]
    path = tmp_path / "t.csv"
    lfio.write_timeseries_csv(path, rows)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,enclosed_measure,front_measure,component_count,sup_v"
    assert lines[1] == "0.0,1.5,3.25,1,0.75"
    assert len(lines) == 3


def test_front_vtk_and_csv(tmp_path, circle64):
    mesh = extract_front(circle64)
    vtk = tmp_path / "front.vtk"
    lfio.write_front_vtk(vtk, mesh)
    text = vtk.read_text()
    assert text.startswith("# vtk DataFile Version 3.0")
    assert "POLYDATA" in text and "LINES" in text
    vpath, epath = tmp_path / "v.csv", tmp_path / "e.csv"
    lfio.write_front_csv(vpath, epath, mesh)
    assert vpath.read_text().splitlines()[0] == "index,x,y"
    assert epath.read_text().splitlines()[0] == "v0,v1"


def test_config_round_trip_identity():
    cfg = tiny_config()
    text = cfg.to_json()
    again = ExperimentConfig.from_json(text)
    assert again.to_json() == text


def test_config_rejects_garbage():
    with pytest.raises(ConfigInvalid):
        ExperimentConfig.from_json("{not json")
    with pytest.raises(ConfigInvalid):
        ExperimentConfig.from_json(json.dumps({"grid": {}}))
    with pytest.raises(ConfigInvalid):
        ExperimentConfig.from_json(json.dumps([1, 2, 3]))


def test_cli_run_produces_outputs(tmp_path):
    cfg_path = tmp_path / "tiny.cfg"
    cfg_path.write_text(tiny_config().to_json())
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
    for name in (
        "config.json",
        "timeseries.csv",
        "final.lsmc",
        "arrival.lsmc",
        "arrival.lsmc.mask",
        "report.json",
        "report.txt",
        "front_initial.vtk",
    ):
        assert (out / name).exists(), name
    report = json.loads((out / "report.json").read_text())
    assert report["c2"]["is_c2"] is True
    assert report["c2"]["case"] == "PointSpherical"
    # last time-series row: front extinct near t = r^2/2 = 0.18
    last = (out / "timeseries.csv").read_text().splitlines()[-1].split(",")
    assert int(last[3]) == 0
    assert float(last[0]) == pytest.approx(0.18, rel=0.08)


def test_cli_runs_are_byte_identical(tmp_path):
    cfg_path = tmp_path / "tiny.cfg"
    cfg_path.write_text(tiny_config().to_json())
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
        outs.append(out)
    files = sorted(p.name for p in outs[0].iterdir())
    assert files == sorted(p.name for p in outs[1].iterdir())
    for name in files:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


def test_cli_malformed_config_leaves_no_files(tmp_path):
    cfg_path = tmp_path / "bad.cfg"
    cfg_path.write_text("{broken")
    out = tmp_path / "out"
    code = main(["run", "--config", str(cfg_path), "--out", str(out)])
    assert code == EXIT_CODES["config"]
    assert not out.exists()


def test_cli_unknown_suite(capsys):
    assert main(["verify", "--suite", "nope"]) == EXIT_CODES["suite"]
    assert "error" in capsys.readouterr().err


def test_cli_shapes_lists_builtins(capsys):
    assert main(["shapes"]) == 0
    out = capsys.readouterr().out
    for name in ("sphere", "cylinder", "torus", "dumbbell", "polygon2d"):
        assert name in out


def test_cli_report_from_dump(tmp_path):
    cfg_path = tmp_path / "tiny.cfg"
    cfg_path.write_text(tiny_config().to_json())
    run_out = tmp_path / "run"
    assert main(["run", "--config", str(cfg_path), "--out", str(run_out)]) == 0
    rep_out = tmp_path / "rep"
    code = main(["report", str(run_out / "arrival.lsmc"), "--out", str(rep_out)])
    assert code == 0
    report = json.loads((rep_out / "report.json").read_text())
    assert report["c2"]["case"] == "PointSpherical"


def test_bundled_configs_parse():
    configs = Path(__file__).resolve().parents[1] / "configs"
    names = sorted(p.name for p in configs.glob("*.cfg"))
    assert names == [
        "circle.cfg",
        "cylinder.cfg",
        "dumbbell.cfg",
        "marriage_ring.cfg",
        "sphere.cfg",
        "spiral.cfg",
    ]
    for p in configs.glob("*.cfg"):
        cfg = ExperimentConfig.load(p)
        assert cfg.to_json() == p.read_text()
