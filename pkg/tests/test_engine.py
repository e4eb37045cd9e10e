import math

import numpy as np
import pytest

from lesionsim import Box, Kernel, Motion, NumericalError, PairProbability, Placement, RateModel
from lesionsim.engine import JumpEngine
from lesionsim.rng import replicate_streams
from lesionsim.state import SystemState

DOM = Box(lo=[0, 0], hi=[1, 1])
MOTION = Motion(sigma_x=0.5, sigma_y=0.5, dt_diff=0.2)


def make_engine(rates, seed, rep, n_x=0, xs=None, motion=MOTION, **kwargs):
    streams = replicate_streams(seed, rep)
    st = SystemState(2)
    if xs is not None:
        st.add_x(np.asarray(xs, dtype=float))
    elif n_x:
        st.add_x(DOM.sample_uniform(streams.init, n_x))
    return JumpEngine(DOM, rates, motion, streams, state=st, **kwargs), st


def test_pure_diffusion_no_event():
    rates = RateModel()
    eng, st = make_engine(rates, 1, 0, n_x=3)
    start = st.positions_x.copy()
    assert eng.next_event(1.0) is None
    assert st.time == pytest.approx(1.0)
    assert st.marginal_counts() == (3, 0)
    assert np.any(st.positions_x != start)  # positions diffused


def test_event_time_exponential_mean():
    rates = RateModel(r_base=2.0)
    times = []
    for rep in range(20_000):
        eng, _ = make_engine(rates, 17, rep, n_x=1)
        times.append(eng.next_event(60.0).time)
    times = np.array(times)
    assert abs(times.mean() - 0.5) < 3 * 0.5 / math.sqrt(len(times))


def test_single_pair_rate():
    rates = RateModel(b_kernel=Kernel(form="constant", amplitude=0.1))
    times = []
    for rep in range(4000):
        eng, _ = make_engine(rates, 23, rep, n_x=2)
        rec = eng.next_event(500.0)
        assert rec.channel == "pair_lethal"
        times.append(rec.time)
    times = np.array(times)
    assert abs(times.mean() - 10.0) < 3 * 10.0 / math.sqrt(len(times))


def test_repair_event_semantics():
    rates = RateModel(r_base=5.0)
    eng, st = make_engine(rates, 3, 0, xs=[[0.5, 0.5]])
    rec = eng.next_event(100.0)
    assert rec.channel == "repair"
    assert st.marginal_counts() == (0, 0)
    assert len(rec.removed) == 1 and len(rec.created) == 0


def test_death_event_places_y_at_parent():
    rates = RateModel(a_base=5.0, m_a=Placement(form="at_parent"))
    eng, st = make_engine(rates, 4, 0, xs=[[0.5, 0.5]], motion=Motion(dt_diff=0.2))
    rec = eng.next_event(100.0)
    assert rec.channel == "death"
    assert st.marginal_counts() == (0, 1)
    np.testing.assert_allclose(st.positions_y, rec.removed)  # frozen motion: same point


def test_pair_event_midpoint_and_exchange():
    # p == 1: both X replaced by one Y at the midpoint
    rates = RateModel(b_kernel=Kernel(form="constant", amplitude=5.0),
                      m_b=Placement(form="midpoint"))
    eng, st = make_engine(rates, 5, 0, xs=[[0.0, 0.0], [1.0, 0.0]], motion=Motion(dt_diff=0.2))
    rec = eng.next_event(100.0)
    assert rec.channel == "pair_lethal"
    assert st.marginal_counts() == (0, 1)
    np.testing.assert_allclose(st.positions_y, [[0.5, 0.0]])
    # p == 0: complete exchange, both removed, nothing created
    rates0 = RateModel(b_kernel=Kernel(form="constant", amplitude=5.0),
                       p=PairProbability(form="constant", value=0.0))
    eng0, st0 = make_engine(rates0, 6, 0, xs=[[0.0, 0.0], [1.0, 0.0]], motion=Motion(dt_diff=0.2))
    rec0 = eng0.next_event(100.0)
    assert rec0.channel == "pair_repair"
    assert st0.marginal_counts() == (0, 0)


def test_empty_run_no_events():
    rates = RateModel(r_base=4.0, a_base=0.1)
    eng, _ = make_engine(rates, 7, 0)
    res = eng.run(1.0, [0.5, 1.0], collect_events=True)
    assert res.events == []
    assert np.all(res.n_x == 0) and np.all(res.n_y == 0)


def test_determinism_same_seed_same_log():
    rates = RateModel(r_base=4.0, a_base=0.5, b_kernel=Kernel(form="ball", amplitude=0.5, epsilon=0.4))
    logs = []
    for _ in range(2):
        eng, _ = make_engine(rates, 99, 7, n_x=12)
        res = eng.run(2.0, [1.0, 2.0], collect_events=True)
        logs.append([(ev.time, ev.channel, ev.removed.tobytes(), ev.created.tobytes())
                     for ev in res.events])
    assert logs[0] == logs[1] and len(logs[0]) > 0


def test_linear_death_process_mean():
    # r=4, a=0.1, b=0: counts follow binomial thinning with survival e^{-4.1 t}
    rates = RateModel(r_base=4.0, a_base=0.1)
    t_check = 0.5
    keep = math.exp(-4.1 * t_check)
    n0, reps = 20, 3000
    vals = np.zeros(reps)
    for rep in range(reps):
        eng, _ = make_engine(rates, 31, rep, n_x=n0)
        res = eng.run(t_check, [t_check])
        vals[rep] = res.n_x[0]
    se = math.sqrt(n0 * keep * (1 - keep) / reps)
    assert abs(vals.mean() - n0 * keep) < 3 * se


def test_monotonicity_without_source():
    rates = RateModel(r_base=2.0, a_base=0.5,
                      b_kernel=Kernel(form="gaussian", amplitude=0.5, epsilon=0.3),
                      p=PairProbability(form="constant", value=0.6))
    for rep in range(100):
        eng, _ = make_engine(rates, 41, rep, n_x=10)
        res = eng.run(3.0, np.linspace(0.2, 3.0, 15))
        assert np.all(np.diff(res.n_x) <= 0)
        assert np.all(np.diff(res.n_y) >= 0)


def test_event_cardinality_contracts():
    rates = RateModel(r_base=1.0, a_base=1.0,
                      b_kernel=Kernel(form="constant", amplitude=0.5),
                      p=PairProbability(form="constant", value=0.5))
    for rep in range(50):
        eng, _ = make_engine(rates, 43, rep, n_x=8)
        res = eng.run(5.0, [5.0], collect_events=True)
        for ev in res.events:
            removed, created = len(ev.removed), len(ev.created)
            assert (ev.channel, removed, created) in {
                ("repair", 1, 0), ("death", 1, 1),
                ("pair_lethal", 2, 1), ("pair_repair", 2, 0),
            }


def test_population_guard():
    from lesionsim import IrradiationModel, SpecificEnergy, YieldFunction

    irr = IrradiationModel(z_f=0.04, f1=SpecificEnergy(form="dirac", z0=0.04),
                           kappa=YieldFunction(form="linear", coeff=5000.0),
                           lam=YieldFunction(form="linear", coeff=0.0),
                           d_dot=50.0, t_irr=10.0)
    streams = replicate_streams(51, 0)
    eng = JumpEngine(DOM, RateModel(), Motion(dt_diff=0.1), streams,
                     irradiation=irr, n_max=500)
    with pytest.raises(NumericalError):
        eng.run(10.0, [10.0])


def test_compensator_integrals_exact():
    # integral of piecewise-constant counts recomputed from the event log
    rates = RateModel(r_base=3.0, a_base=0.2, b_kernel=Kernel(form="constant", amplitude=0.3))
    eng, _ = make_engine(rates, 61, 2, n_x=6)
    t_end = 2.0
    res = eng.run(t_end, [t_end], collect_events=True, collect_compensators=True)
    t_prev, n, acc_n, acc_pairs = 0.0, 6, 0.0, 0.0
    for ev in res.events:
        acc_n += n * (ev.time - t_prev)
        acc_pairs += n * (n - 1) / 2 * (ev.time - t_prev)
        if ev.channel in ("repair", "death"):
            n -= 1
        else:
            n -= 2
        t_prev = ev.time
    acc_n += n * (t_end - t_prev)
    acc_pairs += n * (n - 1) / 2 * (t_end - t_prev)
    assert res.comp_nx[0] == pytest.approx(acc_n, rel=1e-10)
    assert res.comp_pairs[0] == pytest.approx(acc_pairs, rel=1e-10)


def test_spatial_kernel_localizes_pairs():
    # two X far apart with a ball kernel can never pair
    rates = RateModel(b_kernel=Kernel(form="ball", amplitude=10.0, epsilon=0.05))
    eng, st = make_engine(rates, 71, 0, xs=[[0.1, 0.1], [0.9, 0.9]], motion=Motion(dt_diff=0.1))
    assert eng.next_event(2.0) is None
    assert st.marginal_counts() == (2, 0)
