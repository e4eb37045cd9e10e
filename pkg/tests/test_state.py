import numpy as np
import pytest

from lesionsim import Box, Kernel, SystemState, empirical_measure
from lesionsim.grid import Grid

DOM = Box(lo=[0, 0], hi=[1, 1])


def make_state(xs=(), ys=()):
    st = SystemState(2)
    if len(xs):
        st.add_x(np.asarray(xs, dtype=float))
    if len(ys):
        st.add_y(np.asarray(ys, dtype=float))
    return st


def test_marginal_counts():
    assert make_state().marginal_counts() == (0, 0)
    st = make_state(xs=[[0.1, 0.1], [0.2, 0.2], [0.3, 0.3]], ys=[[0.5, 0.5]])
    assert st.marginal_counts() == (3, 1)


def test_kernel_mass_examples():
    empty = make_state()
    ind = Kernel(form="ball", amplitude=1.0, epsilon=0.5)
    assert empty.kernel_mass(np.zeros(2), ind) == 0.0
    st = make_state(xs=[[0.1, 0.0], [0.4, 0.0], [0.9, 0.0]])
    assert st.kernel_mass(np.zeros(2), ind) == pytest.approx(2.0)
    const = Kernel(form="constant", amplitude=1.0)
    st2 = make_state(xs=[[0.1, 0.1], [0.2, 0.2]], ys=[[0.3, 0.3]])
    assert st2.kernel_mass(np.zeros(2), const) == pytest.approx(st2.total)


def test_kernel_type_filters():
    st = make_state(xs=[[0.1, 0.0]], ys=[[0.2, 0.0]])
    x_only = Kernel(form="constant", amplitude=1.0, type_filter="x_only")
    y_only = Kernel(form="constant", amplitude=1.0, type_filter="y_only")
    assert st.kernel_mass(np.zeros(2), x_only) == 1.0
    assert st.kernel_mass(np.zeros(2), y_only) == 1.0


def test_self_exclusion():
    st = make_state(xs=[[0.1, 0.0], [0.2, 0.0]])
    const = Kernel(form="constant", amplitude=1.0)
    masses = st.kernel_mass_at_x_lesions(const)
    np.testing.assert_allclose(masses, [1.0, 1.0])  # each lesion sees only the other
    pair = st.pair_kernel_mass_condensed(const)
    np.testing.assert_allclose(pair, [0.0])  # the two focal lesions see nothing else


def test_permutation_invariance():
    rng = np.random.default_rng(11)
    xs = DOM.sample_uniform(rng, 12)
    ys = DOM.sample_uniform(rng, 5)
    kern = Kernel(form="gaussian", amplitude=1.0, epsilon=0.3)
    grid = Grid(DOM, 4)
    base = make_state(xs, ys)
    m0 = base.kernel_mass(np.array([0.5, 0.5]), kern)
    f0x, f0y = empirical_measure(base, 1, grid)
    for _ in range(10):
        perm = make_state(xs[rng.permutation(12)], ys[rng.permutation(5)])
        assert perm.marginal_counts() == base.marginal_counts()
        assert perm.kernel_mass(np.array([0.5, 0.5]), kern) == pytest.approx(m0, rel=1e-12)
        fx, fy = empirical_measure(perm, 1, grid)
        np.testing.assert_allclose(fx, f0x)
        np.testing.assert_allclose(fy, f0y)


def test_swap_remove_bookkeeping():
    st = make_state(xs=[[0.1, 0.1], [0.2, 0.2], [0.3, 0.3]])
    removed = st.remove_x(0)
    np.testing.assert_allclose(removed, [0.1, 0.1])
    assert st.n_x == 2
    remaining = {tuple(p) for p in st.positions_x}
    assert remaining == {(0.2, 0.2), (0.3, 0.3)}


def test_empirical_measure_normalization():
    grid1 = Grid(DOM, 1)
    st = make_state(xs=[[0.5, 0.5]])
    fx, _ = empirical_measure(st, 1, grid1)
    assert fx[0] == pytest.approx(1.0 / grid1.cell_volume)
    assert fx.sum() * grid1.cell_volume == pytest.approx(1.0)


def test_empirical_measure_binomial_cells():
    rng = np.random.default_rng(12)
    grid = Grid(DOM, 2)
    st = make_state(xs=DOM.sample_uniform(rng, 200))
    fx, _ = empirical_measure(st, 100, grid)
    assert fx.sum() * grid.cell_volume == pytest.approx(200 / 100.0)
    # each of the 4 cells holds Binomial(200, 1/4) lesions
    sd = np.sqrt(200 * 0.25 * 0.75)
    expected = 0.5 / grid.cell_volume
    for value in fx:
        assert abs(value - expected) < 3 * sd / (100 * grid.cell_volume)


def test_empirical_measure_integral_exact_on_disk():
    from lesionsim import Disk

    disk = Disk(center=np.zeros(2), radius=1.0)
    grid = Grid(disk, 8)
    rng = np.random.default_rng(13)
    st = SystemState(2)
    st.add_x(disk.sample_uniform(rng, 500))
    fx, _ = empirical_measure(st, 7, grid)
    assert fx.sum() * grid.cell_volume == pytest.approx(500 / 7.0, rel=1e-12)
