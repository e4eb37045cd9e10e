import numpy as np
import pytest

from lesionsim import Box, Disk
from lesionsim.grid import Grid


def test_box_grid_layout():
    grid = Grid(Box(lo=[0, 0], hi=[1, 1]), 4)
    assert grid.n_cells == 16
    assert grid.cell_volume == pytest.approx(1 / 16)
    assert np.all(grid.locate(np.array([[0.1, 0.1], [0.9, 0.9]])) >= 0)


def test_disk_grid_masked():
    grid = Grid(Disk(center=np.zeros(2), radius=1.0), 8)
    assert grid.n_cells < 64
    assert np.all(np.linalg.norm(grid.centers, axis=1) <= 1.0)


def test_locate_snaps_boundary_points():
    disk = Disk(center=np.zeros(2), radius=1.0)
    grid = Grid(disk, 8)
    rng = np.random.default_rng(3)
    theta = rng.uniform(0, 2 * np.pi, 200)
    pts = 0.999 * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    cells = grid.locate(pts)
    assert np.all((cells >= 0) & (cells < grid.n_cells))


@pytest.mark.parametrize("domain", [Box(lo=[0, 0], hi=[1, 1]), Disk(center=np.zeros(2), radius=1.0)])
def test_laplacian_conserves_mass(domain):
    grid = Grid(domain, 12)
    rng = np.random.default_rng(4)
    f = rng.uniform(0.5, 2.0, grid.n_cells)
    lap = grid.laplacian(f)
    assert abs(lap.sum()) < 1e-10 * np.abs(f).sum()
    # constant field has zero Laplacian under zero-flux boundaries
    np.testing.assert_allclose(grid.laplacian(np.ones(grid.n_cells)), 0.0, atol=1e-13)


def test_laplacian_smooths_peak():
    grid = Grid(Box(lo=[0, 0], hi=[1, 1]), 9)
    f = np.zeros(grid.n_cells)
    center = grid.locate(np.array([[0.5, 0.5]]))[0]
    f[center] = 1.0
    lap = grid.laplacian(f)
    assert lap[center] < 0


def test_upwind_flux_conserves_mass():
    grid = Grid(Box(lo=[0, 0], hi=[1, 1]), 8)
    rng = np.random.default_rng(5)
    f = rng.uniform(0.0, 1.0, grid.n_cells)
    for mu in ([0.3, 0.0], [-0.2, 0.5]):
        out = grid.gradient_upwind_flux(f, np.asarray(mu))
        assert abs(out.sum()) < 1e-12
