import numpy as np
import pytest

from lesionsim import Box, ChemState, ChemSystem, ConfigError, Disk, ReactionTerm
from lesionsim.chemistry import gronwall_envelope
from lesionsim.errors import NumericalError
from lesionsim.grid import Grid
from lesionsim.irradiation import AmorphousTrack

BOX = Box(lo=[0, 0], hi=[1, 1])


def make_state(system, grid=None, values=(1.0,), domain=BOX):
    grid = grid if grid is not None else Grid(domain, 16)
    fields = np.tile(np.asarray(values, dtype=float)[:, None], (1, grid.n_cells))
    return ChemState(system, grid, fields)


def test_uniform_field_unchanged_without_reaction():
    system = ChemSystem(species=("A",), diffusion=np.array([1.0]), dt_chem=1e-4)
    st = make_state(system)
    before = st.fields.copy()
    for _ in range(50):
        st.step(1e-4)
    np.testing.assert_allclose(st.fields, before, atol=1e-14)


@pytest.mark.parametrize("domain", [BOX, Disk(center=np.zeros(2), radius=1.0)])
def test_mass_conservation_without_reaction(domain):
    system = ChemSystem(species=("A",), diffusion=np.array([0.5]), dt_chem=2e-4,
                        footprint_amplitude=np.array([2.0]),
                        track=AmorphousTrack(r_core=0.05, r_penumbra=0.4))
    grid = Grid(domain, 16)
    rng = np.random.default_rng(1)
    fields = rng.uniform(0.5, 2.0, (1, grid.n_cells))
    st = ChemState(system, grid, fields)
    expected = st.mass()
    rngc = np.random.default_rng(2)
    for k in range(200):
        st.step(2e-4)
        if k % 50 == 0:
            center = domain.sample_uniform(rngc)
            z = 0.3
            st.inject_event(center, z)
            expected += 2.0 * z
    assert st.mass() == pytest.approx(expected, rel=1e-12)


def test_footprint_integral_exact():
    system = ChemSystem(species=("A", "B"), diffusion=np.array([0.0, 0.0]),
                        footprint_amplitude=np.array([1.5, 0.5]),
                        track=AmorphousTrack(r_core=0.05, r_penumbra=0.3))
    st = make_state(system, values=(0.0, 0.0))
    inc = st.event_footprint(np.array([0.4, 0.6]), 2.0)
    masses = inc.sum(axis=1) * st.grid.cell_volume
    np.testing.assert_allclose(masses, [3.0, 1.0], rtol=1e-10)


def test_uniform_jump_increments_every_cell():
    system = ChemSystem(species=("A",), diffusion=np.array([0.0]))
    st = make_state(system, values=(0.5,))
    st.inject(np.full_like(st.fields, 0.25))
    np.testing.assert_allclose(st.fields, 0.75)
    with pytest.raises(ConfigError):
        st.inject(np.full_like(st.fields, -1.0))


def test_linear_decay_against_exact():
    k = 2.0
    system = ChemSystem(species=("A",), diffusion=np.array([0.0]),
                        reactions=(ReactionTerm(form="linear_decay", rate=k),), dt_chem=1e-3)
    st = make_state(system, values=(1.0,))
    steps, dt = 1000, 1e-3
    for _ in range(steps):
        st.step(dt)
    exact = np.exp(-k * steps * dt)
    value = st.fields[0, 0]
    assert value == pytest.approx((1 - k * dt) ** steps, rel=1e-12)  # Euler product
    assert abs(value - exact) < k**2 * dt  # first-order error
    assert value == pytest.approx(exact, rel=5e-3)


def test_stability_gate():
    grid = Grid(BOX, 16)
    gate = grid.h**2 / (2 * 2 * 1.0)
    system = ChemSystem(species=("A",), diffusion=np.array([1.0]), dt_chem=2 * gate)
    with pytest.raises(ConfigError):
        make_state(system, grid=grid)


def test_negativity_beyond_tolerance_errors():
    system = ChemSystem(species=("A",), diffusion=np.array([0.0]),
                        reactions=(ReactionTerm(form="linear_decay", rate=2.0),), dt_chem=1.0)
    st = make_state(system, values=(1.0,))
    with pytest.raises(NumericalError):
        st.step(1.0)  # Euler overshoot to -1


def test_nonnegativity_over_random_steps():
    system = ChemSystem(
        species=("A", "B", "C"), diffusion=np.array([0.3, 0.2, 0.1]),
        reactions=(
            ReactionTerm(form="bimolecular", rate=0.8, species=0, species_b=1, species_c=2),
            ReactionTerm(form="linear_decay", rate=0.5, species=2),
            ReactionTerm(form="logistic", rate=0.4, species=1, capacity=2.0),
        ),
        dt_chem=2e-4,
    )
    grid = Grid(BOX, 12)
    rng = np.random.default_rng(3)
    st = ChemState(system, grid, rng.uniform(0.0, 1.5, (3, grid.n_cells)))
    for _ in range(1000):
        st.step(2e-4)
        assert st.fields.min() >= 0.0


def test_bimolecular_gronwall_envelope():
    system = ChemSystem(
        species=("A", "B", "C"), diffusion=np.array([0.2, 0.2, 0.2]),
        reactions=(ReactionTerm(form="bimolecular", rate=1.0, species=0, species_b=1, species_c=2),),
        dt_chem=2e-4,
    )
    grid = Grid(BOX, 12)
    rng = np.random.default_rng(4)
    st = ChemState(system, grid, rng.uniform(0.5, 1.5, (3, grid.n_cells)))
    c0, c1 = system.mass_control()
    assert (c0, c1) == (0.0, 0.0)
    m0 = st.mass()
    volume = grid.n_cells * grid.cell_volume
    t = 0.0
    for _ in range(500):
        st.step(2e-4)
        t += 2e-4
        assert st.mass() <= 1.05 * gronwall_envelope(m0, c0, c1, volume, t)


def test_logistic_mass_control_constant():
    term = ReactionTerm(form="logistic", rate=0.7, species=0, capacity=1.0)
    assert term.mass_control() == (0.0, 0.7)


def test_deterministic_between_jumps():
    system = ChemSystem(species=("A",), diffusion=np.array([0.4]),
                        reactions=(ReactionTerm(form="linear_decay", rate=0.3),), dt_chem=2e-4)
    outs = []
    for _ in range(2):
        st = make_state(system, values=(1.0,))
        st.inject_event(np.array([0.3, 0.3]), 0.7)
        st.step_by(0.05)
        outs.append(st.fields.copy())
    np.testing.assert_array_equal(outs[0], outs[1])
