import numpy as np
import pytest

from fbdlab.initial_data import (MarginError, ProfileDataError, build_initial_data,
                                 moving_profile, standing_profile,
                                 window_margin_sites)
from fbdlab.single_interface import check_membership


def test_moving_profile_shape():
    prof = moving_profile()
    xi = np.linspace(-6, 6, 2001)
    P = prof.P(xi)
    assert np.all(P[xi < -1e-9] > 1.0)
    right = P[xi > 1e-9]
    assert np.all((right > -1.0) & (right < 1.0))
    # continuity and kink at the interface
    assert prof.P(np.array([0.0]))[0] == pytest.approx(1.0)
    h = 1e-7
    slope_l = (prof.P(np.array([0.0])) - prof.P(np.array([-h])))[0] / h
    slope_r = (prof.P(np.array([h])) - prof.P(np.array([0.0])))[0] / h
    assert abs(slope_r - slope_l) == pytest.approx(prof.beta, rel=1e-5)
    prof.validate(6.0)


def test_moving_profile_guards():
    with pytest.raises(ProfileDataError):
        moving_profile(a=0.5, b=1.0, p_inf=-0.5)  # negative slope jump
    with pytest.raises(ProfileDataError):
        moving_profile(p_inf=-2.0)


def test_standing_profile_shape():
    prof = standing_profile()
    xi = np.linspace(-6, 6, 1001)
    P = prof.P(xi)
    assert np.all((P > -1.0) & (P < 1.0))
    assert prof.beta == 0.0
    prof.validate(6.0)


def test_build_smallness_checks():
    prof = moving_profile()
    for eps in (0.1, 0.05, 0.02):
        state, info = build_initial_data(prof, eps, tau_fin=0.2)
        assert check_membership(state.u, state.k)
        assert 0.0 < info.c_eps <= eps
        for name, (val, bound) in info.checks.items():
            assert val <= bound * (1 + 1e-12), name
        # data-derived slope jump is consistent with the continuum value
        assert info.beta_data == pytest.approx(info.beta, rel=0.10)


def test_build_standing_bounded_by_two():
    prof = standing_profile()
    state, info = build_initial_data(prof, 0.05, tau_fin=0.2)
    assert state.u.max() <= 2.0
    assert state.D == 2.0


def test_window_covers_margin():
    prof = moving_profile()
    eps, tau_fin = 0.05, 0.2
    state, info = build_initial_data(prof, eps, tau_fin)
    margin = window_margin_sites(tau_fin / eps**2)
    assert info.j_lo <= -(int(6.0 / eps) + margin)
    assert info.j_hi >= int(6.0 / eps) + margin


def test_p0_formula_extension():
    prof = moving_profile()
    state, info = build_initial_data(prof, 0.1, tau_fin=0.2)
    js = np.arange(info.j_lo, info.j_hi + 1)
    p0 = info.p0_at(js)
    sgn = np.where(js <= 0, 1.0, -1.0)
    assert np.allclose(p0 + sgn, state.u, atol=1e-15)
