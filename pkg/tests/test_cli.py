import json
import subprocess
import sys

import numpy as np
import pytest

from polarsar3d import io
from polarsar3d.cli import main
from polarsar3d.experiments import localization_offsets, localization_scenario
from polarsar3d.forward import Scatterer, Scene, ThreeMaps
from polarsar3d.polarimetry import ScatteringMatrix


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_make_acq_ogival_sweep(tmp_path, capsys):
    code, out, _ = run(capsys, "make-acq", "--theta", "0:2:20", "--phi", "0:5:360", "--freq", "1e9:1e7:3e9",
                       "--mode", "HH", "--out", tmp_path / "a.json")
    assert code == 0 and "M = 161403" in out
    assert len(io.load_acquisition(tmp_path / "a.json")) == 161_403


def test_make_acq_single(tmp_path, capsys):
    code, out, _ = run(capsys, "make-acq", "--theta", "0:1:0", "--phi", "0:1:0", "--freq", "1e9:1:1e9",
                       "--explicit", "--out", tmp_path / "a.json")
    assert code == 0 and "M = 1 " in out


def test_make_acq_singular(tmp_path, capsys):
    code, _, err = run(capsys, "make-acq", "--theta", "90:1:90", "--phi", "0:1:0", "--freq", "1e9:1:1e9",
                       "--out", tmp_path / "a.json")
    assert code == 2 and "singular" in err.lower()


def _write_pipeline_inputs(tmp, scene):
    io.save_scene(scene, tmp / "scene.json")
    main(["make-acq", "--theta", "0:4:20", "--phi", "0:10:350", "--freq", "9e9:2.5e7:11e9", "--out", str(tmp / "acq.json")])
    main(["make-grid", "--acq", str(tmp / "acq.json"), "--extent", "1", "1", "2", "--dims", "32", "32", "64",
          "--out", str(tmp / "grid.json")])


def test_simulate_origin_unit_modulus(tmp_path, capsys):
    _write_pipeline_inputs(tmp_path, Scene([Scatterer((0, 0, 0), ScatteringMatrix.isotropic(1.0))]))
    code, _, _ = run(capsys, "simulate", "--scene", tmp_path / "scene.json", "--acq", tmp_path / "acq.json",
                     "--out", tmp_path / "h.holo")
    assert code == 0
    np.testing.assert_allclose(np.abs(io.read_hologram(tmp_path / "h.holo").values), 1.0, rtol=1e-12)


def test_simulate_seeded_byte_identical(tmp_path, capsys):
    _write_pipeline_inputs(tmp_path, Scene([Scatterer((0.1, 0, 0), ScatteringMatrix(1, 0, 0.5))]))
    for name in ("a", "b"):
        run(capsys, "simulate", "--scene", tmp_path / "scene.json", "--acq", tmp_path / "acq.json",
            "--noise-sigma", "0.05", "--seed", "9", "--out", tmp_path / f"{name}.holo")
    assert (tmp_path / "a.holo").read_bytes() == (tmp_path / "b.holo").read_bytes()


def test_reconstruct_and_slice(tmp_path, capsys):
    sc = localization_scenario(dims=(32, 32, 64))
    _write_pipeline_inputs(tmp_path, sc.scene)
    run(capsys, "simulate", "--scene", tmp_path / "scene.json", "--acq", tmp_path / "acq.json", "--out", tmp_path / "h.holo")
    code, out, _ = run(capsys, "reconstruct", "--holo", tmp_path / "h.holo", "--grid", tmp_path / "grid.json",
                       "--out-dir", tmp_path / "maps")
    assert code == 0 and "relative data fit" in out
    report = json.loads((tmp_path / "maps" / "report.json").read_text())
    assert report["dims"] == [32, 32, 64]
    vols = {k: io.read_volume(tmp_path / "maps" / f"{k}.vol") for k in ("xx", "yy", "xy")}
    grid = io.load_grid(tmp_path / "grid.json")
    maps = ThreeMaps.for_grid(grid, *(vols[k][0] for k in ("xx", "yy", "xy")))
    offsets = localization_offsets(maps, sc.scene, grid)
    assert all(d <= 1 for v in offsets.values() for d in v["local"])
    code, out, _ = run(capsys, "slice", "--map", tmp_path / "maps" / "xx.vol", "--axis", "z", "--index", 32,
                       "--out", tmp_path / "s.pgm")
    assert code == 0 and io.read_pgm(tmp_path / "s.pgm").shape == (32, 32)


def test_reconstruct_ongrid_exact_fit(tmp_path, capsys, ongrid, rng):
    from polarsar3d.forward import Hologram

    acq, g = ongrid
    io.write_hologram(Hologram(rng.standard_normal(len(acq)) + 0j, acq), tmp_path / "h.holo")
    io.save_grid(g, tmp_path / "g.json")
    code, _, _ = run(capsys, "reconstruct", "--holo", tmp_path / "h.holo", "--grid", tmp_path / "g.json",
                     "--out-dir", tmp_path / "out")
    assert code == 0
    assert json.loads((tmp_path / "out" / "report.json").read_text())["data_fit_relative"] < 1e-8


def test_reconstruct_missing_grid(tmp_path, capsys):
    code, _, err = run(capsys, "reconstruct", "--holo", tmp_path / "h.holo", "--grid", tmp_path / "nope.json",
                       "--out-dir", tmp_path / "o")
    assert code == 2 and "not found" in err


def test_bad_volume_is_input_error(tmp_path, capsys):
    (tmp_path / "x.vol").write_bytes(b"garbage")
    code, _, err = run(capsys, "slice", "--map", tmp_path / "x.vol", "--axis", "x", "--index", 0, "--out", tmp_path / "s.pgm")
    assert code == 2 and "magic" in err


@pytest.mark.parametrize("mode, extra", [("adjoint", ["--trials", "100"]), ("weights", []), ("oracle", [])])
def test_check_modes(capsys, mode, extra):
    code, out, _ = run(capsys, "check", "--mode", mode, *extra)
    assert code == 0 and "PASS" in out


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "polarsar3d", "check", "--mode", "weights", "--trials", "500"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert "PASS" in proc.stdout
