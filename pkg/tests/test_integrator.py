import numpy as np
import pytest

from fbdlab.integrator import (EulerConfig, GuardFailure, euler_step, run,
                               stability_dt)
from fbdlab.lattice import LatticeState, energy, neumann
from fbdlab.potentials import piecewise_quadratic, smooth_demo

PW = piecewise_quadratic()
DEMO = smooth_demo()


def test_euler_step_constant_state():
    st = LatticeState(0.0, np.full(5, 1.3), neumann())
    out = euler_step(st, PW, 0.7)
    assert np.array_equal(out.u, st.u)
    assert out.t == 0.7


def test_euler_step_hand_case():
    st = LatticeState(0.0, np.array([3.0, -1.0, -1.0]), neumann())
    out = euler_step(st, PW, 0.1)
    assert np.allclose(out.u, [2.8, -0.8, -1.0], atol=1e-15)


def test_euler_step_zero_dt_identity():
    rng = np.random.default_rng(0)
    st = LatticeState(0.0, rng.normal(size=9), neumann())
    out = euler_step(st, PW, 0.0)
    assert np.array_equal(out.u, st.u)


def test_stability_dt_values():
    assert stability_dt(PW, (-2, 2)) == 0.25
    val = stability_dt(DEMO, (-2, 2))
    assert 0.0 < val < 0.5
    # dt shrinks monotonically as the curvature bound grows
    vals = [stability_dt(DEMO, (-w, w)) for w in (1.0, 2.0, 4.0)]
    assert vals[0] >= vals[1] >= vals[2]


def test_config_validation():
    with pytest.raises(ValueError):
        EulerConfig(dt0=0.0, t_end=1.0)
    with pytest.raises(ValueError):
        EulerConfig(dt0=0.1, t_end=1.0, safety=1.5)
    with pytest.raises(ValueError):
        EulerConfig(dt0=0.1, dt_min=0.2, t_end=1.0)


def test_standing_two_phase_data_no_sign_change():
    # piecewise-quadratic standing interface: sup u <= 2 keeps every sign
    rng = np.random.default_rng(7)
    u0 = np.concatenate([rng.uniform(0.5, 1.9, 20), rng.uniform(-1.9, -0.5, 20)])
    st = LatticeState(0.0, u0, neumann())
    cfg = EulerConfig(dt0=0.2, t_end=10.0)
    traj = run(st, PW, cfg, eps=1.0 / 20)
    u_final = traj.snapshots[-1][1]
    assert np.array_equal(np.sign(u_final), np.sign(u0))


def test_energy_strictly_decreasing_and_mass_conserved():
    rng = np.random.default_rng(8)
    u0 = rng.uniform(-1.5, 1.5, size=101)
    st = LatticeState(0.0, u0, neumann())
    cfg = EulerConfig(dt0=stability_dt(DEMO, (-2, 2)), t_end=40.0,
                      snapshot_times=(10.0, 20.0, 40.0))
    traj = run(st, DEMO, cfg, eps=0.02)
    E = np.array([e for _, e in traj.energies])
    assert np.all(np.diff(E) < 0.0)
    for t, u in traj.snapshots:
        assert abs(u.sum() - u0.sum()) <= 1e-9 * u0.size


def test_comparison_bounds_hold_along_trajectory():
    from fbdlab.lattice import comparison_bounds
    rng = np.random.default_rng(9)
    u0 = rng.uniform(-1.2, 1.2, size=75)
    st = LatticeState(0.0, u0, neumann())
    lo, hi = comparison_bounds(st, DEMO)
    cfg = EulerConfig(dt0=stability_dt(DEMO, (lo, hi)), t_end=20.0,
                      snapshot_times=tuple(np.linspace(1, 20, 8)))
    traj = run(st, DEMO, cfg, eps=0.02)
    for t, u in traj.snapshots:
        assert u.min() >= lo - 1e-12 and u.max() <= hi + 1e-12


def test_snapshots_land_exactly():
    rng = np.random.default_rng(10)
    st = LatticeState(0.0, rng.uniform(-1, 1, 31), neumann())
    times = (0.73, 1.9, 3.1)
    cfg = EulerConfig(dt0=0.21, t_end=3.5, snapshot_times=times)
    traj = run(st, DEMO, cfg, eps=0.1)
    recorded = [t for t, _ in traj.snapshots]
    for s in times:
        assert s in recorded  # exact landing, not interpolation


def test_determinism():
    rng = np.random.default_rng(11)
    u0 = rng.uniform(-1.5, 1.5, size=51)
    cfg = EulerConfig(dt0=0.02, t_end=5.0, snapshot_times=(2.5, 5.0))
    t1 = run(LatticeState(0.0, u0, neumann()), DEMO, cfg, eps=0.05)
    t2 = run(LatticeState(0.0, u0, neumann()), DEMO, cfg, eps=0.05)
    for (ta, ua), (tb, ub) in zip(t1.snapshots, t2.snapshots):
        assert ta == tb and np.array_equal(ua, ub)
    assert t1.energies == t2.energies


def test_spinodal_decomposition_scenario():
    # random data inside the spinodal leave it within tau = 0.002
    rng = np.random.default_rng(12)
    N = 50
    eps = 1.0 / N
    u0 = rng.uniform(DEMO.u_star_lo - 0.3, DEMO.u_star_hi + 0.3, size=2 * N + 1)
    st = LatticeState(0.0, u0, neumann())
    t_0plus = 0.002 / eps**2
    cfg = EulerConfig(dt0=stability_dt(DEMO, (-3, 3)), t_end=t_0plus,
                      snapshot_times=(t_0plus,))
    traj = run(st, DEMO, cfg, eps=eps)
    u = traj.snapshots[-1][1]
    inside = (u > DEMO.u_star_lo + 0.05) & (u < DEMO.u_star_hi - 0.05)
    assert not inside.any()


def test_guard_failure_carries_state():
    # force an unreachable energy decrease: huge dt_min with coarse dt on rough data
    rng = np.random.default_rng(13)
    st = LatticeState(0.0, rng.uniform(-0.3, 0.3, size=21), neumann())
    cfg = EulerConfig(dt0=0.5, dt_min=0.4, t_end=10.0, safety=0.5)
    with pytest.raises(GuardFailure) as exc:
        run(st, DEMO, cfg, eps=0.1)
    assert isinstance(exc.value.state, LatticeState)


def test_equilibrium_fast_forward():
    st = LatticeState(0.0, np.full(9, 1.0), neumann())  # dphi(1) = 0 for demo
    cfg = EulerConfig(dt0=0.1, t_end=5.0)
    traj = run(st, DEMO, cfg, eps=0.1)
    assert traj.snapshots[-1][0] == pytest.approx(5.0)
    assert np.array_equal(traj.snapshots[-1][1], st.u)
