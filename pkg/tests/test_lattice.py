import numpy as np
import pytest

from fbdlab.lattice import (CompatibilityError, LatticeError, LatticeState,
                            comparison_bounds, dirichlet, discrete_laplacian,
                            dissipation, energy, entropy_production,
                            forward_diff, metric_potential, neumann, rhs, window)
from fbdlab.potentials import piecewise_quadratic, smooth_demo

PW = piecewise_quadratic()
DEMO = smooth_demo()


def test_laplacian_constant_in_kernel():
    c = 3.7
    out = discrete_laplacian(np.full(9, c), neumann())
    assert np.abs(out).max() == 0.0


def test_laplacian_interior_entry():
    out = discrete_laplacian(np.array([0.0, 1.0, 0.0]), neumann())
    assert out[1] == -2.0


def test_laplacian_hand_case_with_ghosts():
    # ghost copies u_0 = 1, u_4 = 4
    out = discrete_laplacian(np.array([1.0, 2.0, 4.0]), neumann())
    assert np.array_equal(out, [1.0, 1.0, -2.0])


def test_laplacian_dirichlet_ghosts():
    out = discrete_laplacian(np.array([1.0, 1.0, 1.0]), dirichlet(0.0, 2.0))
    assert np.array_equal(out, [-1.0, 0.0, 1.0])


def test_laplacian_empty_errors():
    with pytest.raises(LatticeError):
        discrete_laplacian(np.array([]), neumann())


def test_state_validation():
    with pytest.raises(LatticeError):
        LatticeState(0.0, [1.0, 2.0], neumann())
    with pytest.raises(LatticeError):
        LatticeState(0.0, [1.0, np.nan, 2.0], neumann())
    st = LatticeState(0.0, [1.0, 2.0, 3.0], neumann())
    with pytest.raises(ValueError):
        st.u[0] = 9.0  # immutable


def test_rhs_constant_state_zero():
    st = LatticeState(0.0, np.ones(7), neumann())
    assert np.abs(rhs(st, PW)).max() == 0.0


def test_rhs_hand_case():
    st = LatticeState(0.0, np.array([3.0, -1.0, -1.0]), neumann())
    assert np.array_equal(rhs(st, PW), [-2.0, 2.0, 0.0])


def test_rhs_smooth_demo_equilibrium():
    # dphi(1) = 4 - 16/4 = 0 exactly
    st = LatticeState(0.0, np.ones(11), neumann())
    assert np.abs(rhs(st, DEMO)).max() < 1e-14


def test_rhs_sums_to_zero_under_neumann():
    rng = np.random.default_rng(1)
    for _ in range(20):
        st = LatticeState(0.0, rng.normal(size=33), neumann())
        assert abs(rhs(st, DEMO).sum()) < 1e-11


def test_energy_values():
    st = LatticeState(0.0, np.ones(5), neumann())
    assert energy(st, PW, 0.3) == 0.0
    st0 = LatticeState(0.0, np.zeros(3), neumann())
    assert energy(st0, PW, 1.0) == pytest.approx(1.5)  # 3 sites * phi(0) = 1/2
    st21 = LatticeState(0.0, np.zeros(21), neumann())
    assert energy(st21, DEMO, 0.1) == pytest.approx(4.2)
    with pytest.raises(LatticeError):
        energy(st, PW, 0.0)


def test_dissipation_values():
    st = LatticeState(0.0, np.full(6, 2.2), neumann())
    assert dissipation(st, PW, 0.5) == 0.0
    st2 = LatticeState(0.0, np.array([3.0, -1.0, -1.0]), neumann())
    # p = (2, 0, 0): forward diffs (-2, 0, ghost 0)
    assert dissipation(st2, PW, 1.0) == pytest.approx(4.0)


def test_metric_potential_two_site_oracle():
    # direct 2-site solve: -(v1 - v0) = 1 with ghost copies, zero mean
    # => v = (1/2, -1/2), metric = (1/2) * (v1 - v0)^2 = 1/2
    val = metric_potential(np.array([1.0, -1.0]), eps=1.0)
    assert val == pytest.approx(0.5, abs=1e-12)


def test_metric_potential_matrix_oracle():
    rng = np.random.default_rng(3)
    n = 17
    udot = rng.normal(size=n)
    udot -= udot.mean()
    # dense Neumann Laplacian oracle
    A = np.zeros((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        A[:, i] = discrete_laplacian(e, neumann())
    # solve -A v = udot with mean(v) = 0 via least squares
    v = np.linalg.lstsq(-A, udot, rcond=None)[0]
    v -= v.mean()
    expected = 0.5 * 1.3 * np.sum(forward_diff(v, neumann()) ** 2)
    assert metric_potential(udot, eps=1.3) == pytest.approx(expected, rel=1e-10)


def test_metric_potential_rejects_incompatible():
    with pytest.raises(CompatibilityError):
        metric_potential(np.array([1.0, -0.5]))


def test_metric_of_rhs_always_finite():
    rng = np.random.default_rng(4)
    for _ in range(10):
        st = LatticeState(0.0, rng.uniform(-2, 2, size=25), neumann())
        val = metric_potential(rhs(st, DEMO), eps=0.1)
        assert np.isfinite(val) and val >= 0.0


def test_comparison_bounds():
    st = LatticeState(0.0, np.array([1.5, -1.5, 0.3]), neumann())
    assert comparison_bounds(st, PW) == (-2.0, 2.0)
    st2 = LatticeState(0.0, np.array([5.0, -1.0, 0.0]), neumann())
    lo, hi = comparison_bounds(st2, PW)
    assert hi == 5.0 and lo == -2.0
    st3 = LatticeState(0.0, np.array([1.2, -1.2, 0.3]), neumann())
    lo, hi = comparison_bounds(st3, DEMO)
    assert (lo, hi) == (DEMO.u_hash_lo, DEMO.u_hash_hi)


def test_entropy_production_identity_upsilon():
    rng = np.random.default_rng(5)
    st = LatticeState(0.0, rng.normal(size=40), neumann())
    vals = entropy_production(st, DEMO, lambda p: p)
    p = DEMO.dphi(st.u)
    expected = forward_diff(p, neumann()) ** 2
    assert np.allclose(vals, expected)
    assert vals.min() >= 0.0


def test_entropy_production_nonnegative_property():
    # 1000 random states x increasing upsilons: sitewise nonnegativity
    rng = np.random.default_rng(6)
    upsilons = [np.tanh, lambda p: p, lambda p: p + 0.2 * np.sin(p) + p**3]
    worst = 0.0
    for _ in range(1000):
        st = LatticeState(0.0, rng.uniform(-2.5, 2.5, size=12), neumann())
        for ups in upsilons:
            worst = min(worst, float(entropy_production(st, PW, ups).min()))
    assert worst >= -1e-12


def test_window_bc_matches_neumann_stencil():
    u = np.array([2.0, 1.0, -0.5, -1.0])
    assert np.array_equal(discrete_laplacian(u, window()),
                          discrete_laplacian(u, neumann()))


def test_rhs_dirichlet_ghosts_act_on_u():
    # ghost constants are u-values: the p-array is padded with dphi(c)
    st = LatticeState(0.0, np.array([1.0, 1.0, -1.0]), dirichlet(3.0, -1.0))
    out = rhs(st, PW)
    # p = (0, 0, 0), ghosts dphi(3) = 2, dphi(-1) = 0
    assert np.array_equal(out, [2.0, 0.0, 0.0])
