import numpy as np
import pytest
from scipy.stats import chi2

from lesionsim import Box, ConfigError, Motion
from lesionsim.diffusion import step_all
from lesionsim.state import SystemState

DOM = Box(lo=[0, 0], hi=[1, 1])


def make_state(xs):
    st = SystemState(2)
    st.add_x(np.asarray(xs, dtype=float))
    return st


def test_frozen_dynamics():
    st = make_state([[0.3, 0.4]])
    step_all(st, Motion(dt_diff=0.1), 0.1, DOM, np.random.default_rng(0))
    np.testing.assert_allclose(st.positions_x, [[0.3, 0.4]])
    assert st.time == pytest.approx(0.1)


def test_pure_drift():
    st = make_state([[0.2, 0.5]])
    motion = Motion(mu_x=np.array([1.0, 0.0]), dt_diff=0.1)
    step_all(st, motion, 0.1, DOM, np.random.default_rng(0))
    np.testing.assert_allclose(st.positions_x, [[0.3, 0.5]])


def test_step_exceeding_dt_diff_rejected():
    st = make_state([[0.2, 0.5]])
    with pytest.raises(ConfigError):
        step_all(st, Motion(sigma_x=0.1, dt_diff=0.01), 0.1, DOM, np.random.default_rng(0))


def test_single_step_variance():
    # no boundary contact at this scale: increments are exactly Gaussian
    sigma, dt, n = 0.5, 1e-4, 100_000
    motion = Motion(sigma_x=sigma, dt_diff=dt)
    st = make_state(np.tile([0.5, 0.5], (n, 1)))
    step_all(st, motion, dt, DOM, np.random.default_rng(0))
    steps = st.positions_x - 0.5
    var = steps.var(axis=0, ddof=1)
    target = sigma**2 * dt
    # 3-sigma band of the chi-square variance estimator
    tol = 3 * target * np.sqrt(2.0 / (n - 1))
    assert np.all(np.abs(var - target) < tol)
    assert np.abs(steps.mean()) < 3 * sigma * np.sqrt(dt / n)


def test_containment_and_count_preservation():
    motion = Motion(sigma_x=0.8, sigma_y=0.8, dt_diff=0.05)
    st = make_state(DOM.sample_uniform(np.random.default_rng(1), 50))
    st.add_y(DOM.sample_uniform(np.random.default_rng(2), 20))
    rng = np.random.default_rng(3)
    for _ in range(200):
        step_all(st, motion, 0.05, DOM, rng)
        assert np.all(DOM.contains(st.positions_x))
        assert np.all(DOM.contains(st.positions_y))
    assert st.marginal_counts() == (50, 20)


def test_matrix_sigma():
    sig = np.array([[0.3, 0.0], [0.1, 0.2]])
    motion = Motion(sigma_x=sig, dt_diff=1e-4)
    n = 200_000
    st = make_state(np.tile([0.5, 0.5], (n, 1)))
    step_all(st, motion, 1e-4, DOM, np.random.default_rng(5))
    steps = st.positions_x - 0.5
    cov = np.cov(steps.T)
    target = sig @ sig.T * 1e-4
    assert np.allclose(cov, target, rtol=0.05, atol=2e-7)


def test_mean_square_displacement_slope():
    # ensemble MSD grows like sigma^2 * d * t before boundary contact
    sigma, dt, n, steps = 0.1, 1e-3, 10_000, 50
    motion = Motion(sigma_x=sigma, dt_diff=dt)
    st = make_state(np.tile([0.5, 0.5], (n, 1)))
    rng = np.random.default_rng(6)
    times, msd = [], []
    for k in range(1, steps + 1):
        step_all(st, motion, dt, DOM, rng)
        times.append(k * dt)
        msd.append(np.mean(np.sum((st.positions_x - 0.5) ** 2, axis=1)))
    slope = np.polyfit(times, msd, 1)[0]
    assert slope == pytest.approx(sigma**2 * 2, rel=0.05)


def test_reflected_bm_stationary_uniform():
    # moderate version of the stationarity check; the acceptance suite runs
    # the full-length single-particle configuration
    sigma, dt = 0.5, 1e-3
    motion = Motion(sigma_x=sigma, dt_diff=dt)
    n = 2000
    st = make_state(DOM.sample_uniform(np.random.default_rng(7), n))
    rng = np.random.default_rng(8)
    samples = []
    for k in range(8000):
        step_all(st, motion, dt, DOM, rng)
        if k >= 2000 and k % 2000 == 0:
            samples.append(st.positions_x.copy())
    pts = np.concatenate(samples)
    ij = np.clip((pts * 4).astype(int), 0, 3)
    counts = np.zeros((4, 4))
    np.add.at(counts, (ij[:, 0], ij[:, 1]), 1.0)
    expected = len(pts) / 16.0
    stat = ((counts - expected) ** 2 / expected).sum()
    assert stat < chi2.ppf(0.999, 15)
