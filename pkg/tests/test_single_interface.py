import numpy as np
import pytest

from fbdlab.integrator import EulerConfig, run as euler_run
from fbdlab.kernel import KernelEvaluator
from fbdlab.lattice import LatticeState, neumann, rhs
from fbdlab.potentials import piecewise_quadratic
from fbdlab.single_interface import (DecompositionMismatch, PhaseConsistencyError,
                                     SequentialityError, SingleInterfaceState,
                                     advance_to_next_transition, check_membership,
                                     decompose, inter_event_integrator, linear_rhs,
                                     run_single_interface)
from conftest import random_x1_dataset

PW = piecewise_quadratic()


def test_membership_basic():
    u = np.concatenate([np.ones(5), -np.ones(5)])
    assert check_membership(u, 5)
    u2 = u.copy()
    u2[3] = 0.0
    assert not check_membership(u2, 5)
    u3 = u.copy()
    u3[7] = -2.5
    assert not check_membership(u3, 5)
    assert not check_membership(u, 0)  # no left phase


def test_linear_rhs_matches_general_rhs():
    # equivalence on 1000 random phase-region states (brute-force oracle)
    rng = np.random.default_rng(21)
    worst = 0.0
    for _ in range(1000):
        m = rng.integers(8, 30)
        k = int(rng.integers(2, m - 2))
        u = np.concatenate([rng.uniform(0.05, 4.0, k), rng.uniform(-1.95, -0.05, m - k)])
        st = LatticeState(0.0, u, neumann())
        a = linear_rhs(u, k)
        b = rhs(st, PW)
        worst = max(worst, float(np.abs(a - b).max()))
    assert worst == 0.0


def test_linear_rhs_delta_terms():
    u = np.concatenate([np.full(4, 2.0), np.full(4, -1.0)])  # lap u = 0 except at split
    out = linear_rhs(u, 4)
    # stencil terms: lap at the split plus the +2/-2 sources
    assert out[3] == pytest.approx(-3.0 + 2.0)   # lap = -1 - 2*0 + ... hand: u=(2,2,2,2,-1,-1,-1,-1)
    assert out[4] == pytest.approx(3.0 - 2.0)


def test_linear_rhs_membership_guard():
    u = np.concatenate([np.ones(4), np.ones(4)])
    with pytest.raises(PhaseConsistencyError):
        linear_rhs(u, 4)
    # check=False skips the guard
    linear_rhs(u, 4, check=False)


def test_standing_interface_no_event():
    rng = np.random.default_rng(22)
    u0 = np.concatenate([rng.uniform(0.3, 1.9, 30), rng.uniform(-1.9, -0.3, 30)])
    st = SingleInterfaceState.from_initial(u0, 30)
    assert st.D == 2.0
    run, log = run_single_interface(st, horizon=25.0)
    assert len(log.events) == 0
    assert run.final.t == 25.0
    # sign pattern intact
    assert check_membership(run.final.u, 30)


def test_event_invariants_on_driven_data():
    rng = np.random.default_rng(23)
    u0, k = random_x1_dataset(rng)
    st = SingleInterfaceState.from_initial(u0, k)
    run, log = run_single_interface(st, horizon=40.0)
    assert len(log.events) >= 2
    times = log.times
    assert np.all(np.diff(times) > 0)
    for e in log.events:
        assert e.u_left > 2.0
        assert e.jump == pytest.approx(4.0, abs=1e-8)
    gaps = np.diff(times)
    assert gaps.min() >= log.min_gap_bound() - 1e-8
    # comparison bound along snapshots
    for t in np.linspace(0, 40, 9):
        u, _ = run.sample(t)
        assert u.max() <= st.D + 1e-9


def test_event_location_tolerance():
    rng = np.random.default_rng(24)
    u0, k = random_x1_dataset(rng)
    st = SingleInterfaceState.from_initial(u0, k)
    state2, event = advance_to_next_transition(st, horizon=40.0)
    assert event is not None
    # the interface site is at zero to solver tolerance at the event
    assert abs(state2.u[state2.k - 1]) <= 1e-10
    assert state2.k == st.k + 1
    assert event.udot_after == pytest.approx(event.udot_before + 4.0, abs=1e-12)


def test_mirrored_data_is_rejected():
    # reflecting a valid state gives negative left / positive right: not a
    # single-interface state (rightward propagation is baked into sgn(0)=+1)
    rng = np.random.default_rng(25)
    u0, k = random_x1_dataset(rng)
    mirrored = -u0[::-1]
    assert not any(check_membership(mirrored, kk) for kk in range(1, mirrored.size))
    with pytest.raises(PhaseConsistencyError):
        SingleInterfaceState.from_initial(mirrored, mirrored.size - k)


def test_sequentiality_check_fires_on_corrupted_state():
    u = np.concatenate([np.full(10, 3.0), np.full(10, -1.0)])
    st = SingleInterfaceState.from_initial(u, 10)
    bad = st.u.copy()
    bad[15] = 0.5  # a site beyond the interface in the wrong phase
    bad_state = SingleInterfaceState(0.0, bad, 10, st.D, 0)
    with pytest.raises(SequentialityError):
        advance_to_next_transition(bad_state, horizon=1.0)


def test_decomposition_reference_run(reference_run, ev):
    _, run, log = reference_run
    dec = decompose(run, log, ev=ev)
    assert dec.max_residual <= 1e-6
    assert len(dec.residuals) == 20


def test_decomposition_before_first_event(reference_run, ev):
    _, run, log = reference_run
    t_first = log.times[0]
    dec = decompose(run, log, ev=ev, checkpoints=[0.5 * t_first])
    (t, _), = ((t, r) for t, r in dec.residuals)
    r_vals = dec.r_checkpoints[t]
    assert np.abs(r_vals).max() == 0.0  # r vanishes before the first event


def test_r_jump_at_event(reference_run, ev):
    from fbdlab.single_interface import singular_part
    _, run, log = reference_run
    e = log.events[0]
    js = np.array([e.k])
    before = singular_part(log.events, js, e.t_star - 1e-9, ev)
    after = singular_part(log.events, js, e.t_star, ev)
    assert after[0] - before[0] == pytest.approx(-2.0, abs=1e-7)


def test_decomposition_mismatch_raises(reference_run, ev):
    _, run, log = reference_run
    from fbdlab.single_interface import TransitionLog
    broken = TransitionLog(D=log.D, events=log.events[:-1])  # drop an event
    if len(log.events) >= 1:
        with pytest.raises(DecompositionMismatch):
            decompose(run, broken, ev=ev, checkpoints=[run.final.t])


def test_inter_event_pure_heat_constant():
    u0 = np.full(40, 0.7)
    dense = inter_event_integrator(u0, -10, t_span=3.0)  # sources outside window
    out = dense.sample(3.0)
    assert np.allclose(out, 0.7, atol=1e-13)


def test_inter_event_single_site_spreads_like_kernel(ev):
    m = 161
    u0 = np.zeros(m)
    u0[80] = 1.0
    dense = inter_event_integrator(u0, -10, t_span=6.0)
    out = dense.sample(6.0)
    js = np.arange(m) - 80
    expected = ev.g_many(js, 6.0)
    assert np.abs(out - expected).max() < 1e-11  # window wide enough for tails


def test_inter_event_duhamel_vs_rk4():
    rng = np.random.default_rng(26)
    u0, k = random_x1_dataset(rng, margin=30, core=10)
    dense = inter_event_integrator(u0, k, t_span=5.0, cross_check=True)
    a = dense.sample(5.0)
    b = inter_event_integrator(u0, k, t_span=5.0, method="rk4").sample(5.0)
    assert np.abs(a - b).max() <= 1e-8


def test_euler_cross_validation(reference_run):
    state, run, log = reference_run
    u50, k50 = run.sample(50.0)
    st = LatticeState(0.0, state.u, neumann())
    cfg = EulerConfig(dt0=1e-4, t_end=50.0, energy_guard=False)
    traj = euler_run(st, PW, cfg, eps=1.0)
    u_euler = traj.snapshots[-1][1]
    assert np.abs(u_euler - u50).max() <= 1e-3


def test_neighbour_travel_time_identity(reference_run, ev):
    # integral of p'_k over one inter-event interval equals p_k(t*_{k+1}) - p_k(t*_k) >= 2
    _, run, log = reference_run
    if len(log.events) < 2:
        pytest.skip("needs two events")
    e0, e1 = log.events[0], log.events[1]
    col = e0.k - run.initial.j_lo
    p_lo = run.p_at(e0.t_star)[col]
    p_hi = run.p_at(e1.t_star - 1e-10)[col]
    diff = p_hi - p_lo
    # quadrature of p' over the interval reproduces the difference
    ts = np.linspace(e0.t_star, e1.t_star - 1e-10, 2001)
    pdots = []
    for t in ts:
        u, kloc = run.sample(t)
        pdots.append(linear_rhs(u, kloc, check=False)[col])
    integral = np.trapezoid(pdots, ts)
    assert integral == pytest.approx(diff, abs=1e-4)
    assert diff >= 2.0 - 1e-8
