import math
import os
from pathlib import Path

import numpy as np
import pytest

import dsar

OMEGA0 = 2 * math.pi * 8e9
TARGET = (-20.0, -31.0, 50.0)


def layover_x(target, xa, ha):
    x, _, h = target
    return xa + math.sqrt((x - xa) ** 2 + (h - ha) ** 2 - ha**2)


def test_vectors_round_trip_as_tuples():
    traj = dsar.Trajectory.y_pass(-7100.0, 3000.0, 100.0, 1000.0)
    assert traj.position(0.0) == (-7100.0, 0.0, 3000.0)
    assert traj.velocity(0.0) == (0.0, 100.0, 0.0)
    assert traj.kind == dsar.TrajectoryKind.Linear
    with pytest.raises(TypeError):
        dsar.range(traj, 0.0, (1.0, 2.0))


def test_geometry():
    traj = dsar.Trajectory.y_pass(-7100.0, 3000.0, 100.0, 1000.0)
    s0 = dsar.zero_doppler_time(traj, TARGET)
    assert s0 == pytest.approx(-0.31)
    assert dsar.doppler(traj, s0, TARGET, OMEGA0) == pytest.approx(0.0, abs=1e-6)
    r = dsar.range(traj, s0, TARGET)
    assert r == pytest.approx(math.hypot(7080.0, 2950.0), rel=1e-12)
    with pytest.raises(dsar.NotFoundError):
        dsar.zero_doppler_time(traj, (0.0, 900.0, 0.0))


def test_wideband_image_peak_and_linearity():
    traj = dsar.Trajectory.y_pass(-7100.0, 3000.0, 100.0, 1000.0)
    cfg = dsar.WidebandConfig()
    cfg.n_freq, cfg.n_slow = 128, 256
    target = (-20.0, 0.0, 50.0)
    data = dsar.simulate_wideband([dsar.Scatterer(*target)], traj, cfg)
    assert data.samples.shape == (128, 256)
    assert data.samples.dtype == np.complex128
    assert len(data.slow_times) == 256

    grid = dsar.ImageGrid(64.0, 4.0, 1.0)
    img = dsar.backproject_wideband(data, traj, grid)
    assert img.pixels.shape == (grid.ny, grid.nx)
    peak = dsar.find_peak(img)
    assert abs(peak.position[0] - layover_x(target, -7100.0, 3000.0)) <= 1.0
    assert peak.position[1] == 0.0

    doubled = dsar.simulate_wideband([dsar.Scatterer(*target, reflectivity=2j)], traj, cfg)
    np.testing.assert_allclose(doubled.samples, 2j * data.samples, rtol=0, atol=1e-12 * 2 * 128)


def test_interferogram_of_identical_images_has_zero_phase():
    grid = dsar.ImageGrid(4.0, 4.0, 1.0)
    rng = np.random.default_rng(3)
    pixels = rng.normal(size=(grid.ny, grid.nx)) + 1j * rng.normal(size=(grid.ny, grid.nx))
    img = dsar.ComplexImage(grid, pixels)
    ifg = dsar.interferogram(img, img)
    assert (ifg.offset.dx, ifg.offset.dy) == (0, 0)
    assert np.all(np.angle(ifg.image.pixels) == 0.0)
    with pytest.raises(ValueError):
        dsar.ComplexImage(grid, pixels[:, :3])


def test_resolve_ambiguity():
    m = dsar.resolve_ambiguity(0.5, 0.5 + 2 * math.pi * 3 + 0.2)
    assert m.ambiguity_index == 3
    assert m.unwrapped == pytest.approx(0.5 + 6 * math.pi)
    assert dsar.wrap_phase(3 * math.pi) == pytest.approx(math.pi)


def test_solvers_recover_the_reference_target():
    wb = dsar.WbGeometry(
        dsar.Trajectory.y_pass(-7100.0, 3000.0, 100.0, 1000.0),
        dsar.Trajectory.y_pass(-7100.0, 4000.0, 100.0, 1000.0),
        OMEGA0,
    )
    unb = dsar.UnbGeometry(
        dsar.Trajectory.y_pass(-7100.0, 2000.0, 100.0, 1000.0),
        dsar.Trajectory.y_pass(-7100.0, 4000.0, 400.0, 1000.0),
        OMEGA0,
        0.01,
    )
    grid = dsar.SearchGrid()
    grid.fixed_y = -31.0
    for sol in (
        dsar.solve_wb(dsar.measure_wb_truth(TARGET, wb), wb, grid),
        dsar.solve_unb(dsar.measure_unb_truth(TARGET, unb), unb, grid),
    ):
        x, y, h = sol.position
        assert abs(x - TARGET[0]) <= 1.0
        assert y == TARGET[1]
        assert abs(h - TARGET[2]) <= 0.5
        assert not sol.degenerate


def test_config_errors_are_value_errors(tmp_path):
    with pytest.raises(ValueError, match="unknown section"):
        dsar.parse_config("[imaging]\n", "x.ini").validate()
    cfg = dsar.load_config(Path(os.environ.get("DSAR_CONFIG_DIR", "configs")) / "paper-wb.ini")
    assert cfg.name == "paper-wb"
    assert len(cfg.hash()) == 64


def test_run_pipeline_writes_a_manifest(tmp_path):
    text = dsar.builtin_config_text("paper-wb").replace("half_extent_y_m = 64", "half_extent_y_m = 4")
    text = text.replace("ground_position_m = -20, -31", "ground_position_m = -20, 0")
    cfg = dsar.parse_config(text, "strip.ini")
    result = dsar.run_pipeline(cfg, tmp_path)
    assert (tmp_path / "manifest.json").exists()
    assert result.unb is None
    x, y, h = result.wideband.solution.position
    assert abs(x + 20.0) <= 1.0 and y == 0.0 and abs(h - 50.0) <= 0.5
    assert "wideband/solution.json" in result.files
    img = dsar.read_image(tmp_path / "wideband" / "image1.dsar")
    assert img.pixels.shape == (img.grid.ny, img.grid.nx) == (8, 128)
