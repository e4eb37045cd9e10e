import numpy as np
import pytest
from scipy.stats import chi2

from lesionsim import Box, ConfigError, Disk
from lesionsim.errors import NumericalError

RNG = np.random.default_rng(101)


def test_contains_examples():
    disk = Disk(center=np.zeros(2), radius=1.0)
    assert disk.contains(np.array([0.0, 0.0]))
    assert not disk.contains(np.array([2.0, 0.0]))
    box = Box(lo=[0, 0], hi=[1, 1])
    assert box.contains(np.array([1.0, 1.0]))  # closed boundary corner


def test_contains_dimension_mismatch():
    disk = Disk(center=np.zeros(2), radius=1.0)
    with pytest.raises(ConfigError):
        disk.contains(np.array([0.0, 0.0, 0.0]))


def test_reflect_examples():
    box = Box(lo=[0, 0], hi=[1, 1])
    np.testing.assert_allclose(box.reflect(np.array([1.2, 0.5])), [0.8, 0.5])
    disk = Disk(center=np.zeros(2), radius=1.0)
    np.testing.assert_allclose(disk.reflect(np.array([0.5, 0.0])), [0.5, 0.0])
    # radial incidence: |q'| = 2r - |q|
    np.testing.assert_allclose(disk.reflect(np.array([1.5, 0.0])), [0.5, 0.0])


def test_reflect_idempotent():
    for domain in (Box(lo=[0, 0], hi=[1, 2]), Disk(center=np.zeros(2), radius=1.5)):
        pts = RNG.normal(scale=3.0, size=(500, 2))
        once = domain.reflect(pts)
        assert np.all(domain.contains(once))
        np.testing.assert_allclose(domain.reflect(once), once)


def _fold_scalar(x, lo, hi):
    # reference triangle-wave fold, one bounce at a time
    span = hi - lo
    while x < lo or x > hi:
        if x > hi:
            x = 2 * hi - x
        else:
            x = 2 * lo - x
    return x


def test_box_fold_matches_scalar_oracle():
    box = Box(lo=[-1, 0], hi=[2, 1])
    pts = RNG.uniform(-20, 20, size=(1000, 2))
    folded = box.reflect(pts)
    for p, f in zip(pts, folded):
        assert f[0] == pytest.approx(_fold_scalar(p[0], -1, 2), abs=1e-12)
        assert f[1] == pytest.approx(_fold_scalar(p[1], 0, 1), abs=1e-12)


def test_reflect_nonconvergence_guard():
    disk = Disk(center=np.zeros(2), radius=1.0)
    with pytest.raises(NumericalError):
        disk.reflect(np.array([1e9, 0.0]))


def test_sample_uniform_disk_mean():
    disk = Disk(center=np.zeros(2), radius=1.0)
    pts = disk.sample_uniform(np.random.default_rng(7), 100_000)
    assert np.all(disk.contains(pts))
    tol = 3 * 0.5 / np.sqrt(len(pts))  # per-axis sd of a uniform disk coordinate is r/2
    assert np.all(np.abs(pts.mean(axis=0)) < tol)


def test_sample_uniform_box_quadrant():
    box = Box(lo=[0, 0], hi=[1, 1])
    pts = box.sample_uniform(np.random.default_rng(8), 100_000)
    frac = np.mean(np.all(pts < 0.5, axis=1))
    assert abs(frac - 0.25) < 3 * np.sqrt(0.25 * 0.75 / len(pts))


@pytest.mark.parametrize("domain", [Box(lo=[0, 0], hi=[1, 1]), Disk(center=np.zeros(2), radius=1.0)])
def test_sample_uniform_chi_square(domain):
    pts = domain.sample_uniform(np.random.default_rng(9), 100_000)
    lo, hi = domain.bounding_box()
    ij = np.floor((pts - lo) / (hi - lo) * 4).astype(int)
    np.clip(ij, 0, 3, out=ij)
    counts = np.zeros((4, 4))
    np.add.at(counts, (ij[:, 0], ij[:, 1]), 1.0)
    if isinstance(domain, Disk):
        # expected mass per cell from the disk area overlap, by midpoint quadrature
        expected = np.zeros((4, 4))
        sub = 64
        xs = np.linspace(lo[0], hi[0], 4 * sub, endpoint=False) + (hi[0] - lo[0]) / (8 * sub)
        gx, gy = np.meshgrid(xs, xs, indexing="ij")
        inside = (gx**2 + gy**2) <= domain.radius**2
        for i in range(4):
            for j in range(4):
                block = inside[i * sub : (i + 1) * sub, j * sub : (j + 1) * sub]
                expected[i, j] = block.mean()
        expected = expected / expected.sum() * len(pts)
        keep = expected > 5
        stat = ((counts[keep] - expected[keep]) ** 2 / expected[keep]).sum()
        dof = keep.sum() - 1
    else:
        expected = len(pts) / 16.0
        stat = ((counts - expected) ** 2 / expected).sum()
        dof = 15
    assert stat < chi2.ppf(0.999, dof)


def test_domain_validation():
    with pytest.raises(ConfigError):
        Disk(center=np.zeros(2), radius=-1.0)
    with pytest.raises(ConfigError):
        Box(lo=[0, 0], hi=[0, 1])


def test_3d_support():
    ball = Disk(center=np.zeros(3), radius=2.0)
    pts = ball.sample_uniform(np.random.default_rng(3), 1000)
    assert pts.shape == (1000, 3)
    assert np.all(ball.contains(pts))
    np.testing.assert_allclose(ball.reflect(np.array([3.0, 0.0, 0.0])), [1.0, 0.0, 0.0])
