import csv
import json

import pytest

from conftest import MIXED_16, lattice_json
from qlbw.cli import main, parse_initial
from qlbw.components import LeftHalfUniform, PointSource


@pytest.fixture
def small_lattice(tmp_path):
    path = tmp_path / "small.json"
    path.write_text(lattice_json((8, 8), 4, [{"x": [5, 6], "y": [2, 5], "boundary": "specular"}]))
    return path


def test_validate_reference(capsys):
    assert main(["validate", str(MIXED_16)]) == 0
    assert "18 qubits" in capsys.readouterr().out


def test_validate_reports_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(lattice_json((16, 16), 4, [{"x": [12, 9], "y": [3, 6], "boundary": "specular"}]))
    assert main(["validate", "--lattice", str(bad)]) == 1
    assert "geometry[0].x" in capsys.readouterr().err
    assert main(["validate", str(tmp_path / "missing.json")]) == 1


def test_build_and_lower(small_lattice, tmp_path, capsys):
    dump = tmp_path / "step.txt"
    assert main(["build", "--lattice", str(small_lattice), "--dump", str(dump)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["gate_count"] == len(dump.read_text().splitlines())
    assert main(["lower", "--lattice", str(small_lattice), "--level", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["lowered_gate_count"] > info["gate_count"]


def test_simulate_outputs(small_lattice, tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--lattice", str(small_lattice), "--steps", "3", "--shots", "200",
                 "--seed", "4", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["counters"]["step_applications"] == 3
    assert manifest["seed"] == 4
    names = sorted(p.name for p in out.iterdir())
    assert names == ["counts.csv", "density_0001.vtk", "density_0002.vtk", "density_0003.vtk",
                     "geometry.stl", "manifest.json"]
    rows = list(csv.DictReader((out / "counts.csv").open()))
    assert sum(int(r["count"]) for r in rows if r["step"] == "2") == 200


def test_simulate_zero_steps(small_lattice, tmp_path):
    out = tmp_path / "zero"
    assert main(["simulate", "--lattice", str(small_lattice), "--steps", "0", "--out", str(out)]) == 0
    assert (out / "manifest.json").exists()
    assert not list(out.glob("density_*.vtk")) and not (out / "counts.csv").exists()


def test_simulate_reproducible_from_manifest(small_lattice, tmp_path, monkeypatch):
    monkeypatch.delenv("QLBW_SEED", raising=False)
    a, b = tmp_path / "a", tmp_path / "b"
    main(["simulate", "--lattice", str(small_lattice), "--steps", "2", "--out", str(a), "--no-snapshots"])
    main(["simulate", "--manifest", str(a / "manifest.json"), "--out", str(b)])
    for name in ("counts.csv", "density_0001.vtk", "density_0002.vtk", "geometry.stl"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert json.loads((b / "manifest.json").read_text())["counters"]["step_applications"] == 3


def test_seed_env_override(small_lattice, tmp_path, monkeypatch):
    monkeypatch.setenv("QLBW_SEED", "99")
    out = tmp_path / "env"
    main(["simulate", "--lattice", str(small_lattice), "--steps", "1", "--seed", "1", "--out", str(out)])
    assert json.loads((out / "manifest.json").read_text())["seed"] == 99


def test_simulate_point_inside_obstacle(small_lattice, tmp_path, capsys):
    code = main(["simulate", "--lattice", str(small_lattice), "--steps", "1", "--initial", "point:5,3:1,1",
                 "--out", str(tmp_path / "x")])
    assert code == 1
    assert "PositionInsideObstacle" in capsys.readouterr().err


def test_parse_initial():
    assert isinstance(parse_initial("left-half"), LeftHalfUniform)
    assert parse_initial("point:1,2:-1,2") == PointSource((1, 2), (-1, 2))


def test_export_from_counts(small_lattice, tmp_path):
    run = tmp_path / "run"
    main(["simulate", "--lattice", str(small_lattice), "--steps", "2", "--exact", "--out", str(run)])
    out = tmp_path / "exp"
    assert main(["export", "--lattice", str(small_lattice), "--counts", str(run / "counts.csv"),
                 "--out", str(out)]) == 0
    assert (out / "density_0002.vtk").read_bytes() == (run / "density_0002.vtk").read_bytes()
    assert (out / "geometry.stl").exists()


def test_bench_simulation_counters(tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--suite", "simulation", "--steps", "4", "--max-obstacles", "1", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 4
    for r in rows:
        assert int(r["step_applications"]) == (4 if r["snapshots"] == "1" else 10)


def test_bench_assembly_monotone(capsys):
    assert main(["bench", "--suite", "assembly", "--max-obstacles", "6"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    counts = [int(r["ir_gate_count"]) for r in rows]
    assert counts == sorted(counts) and len(rows) == 7
