"""Macroscopic single-interface initial data for the piecewise-quadratic lattice.

Profiles describe the macroscopic derivative field P at time zero: continuous,
crossing the critical value 1 exactly at xi = 0 (moving class) or staying
below it everywhere (standing class), with one admissible kink at the origin.
The lattice data are

    u_j(0) = P(eps j) + c_eps + sgn(-j),

with sgn(0) = +1, so sites j <= 0 start in the positive phase and j >= 1 in
the negative one; the small offset c_eps > 0 keeps the first transition time
positive and vanishes with eps.

The builder asserts the three discrete smallness conditions

    |lap p_0| <= beta eps + alpha eps^2,
    sup_j |grad+ p_j| <= alpha eps,
    sup_{j != 0} |lap p_j| <= alpha eps^2,

where alpha bounds |P'| + |P''| away from the kink and beta is the one-sided
slope jump at 0 (the eps^2 term is the exact Taylor remainder of the kink
stencil).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .single_interface import SingleInterfaceState

__all__ = [
    "MacroProfile",
    "MacroInitialData",
    "moving_profile",
    "standing_profile",
    "build_initial_data",
    "window_margin_sites",
]


class ProfileDataError(ValueError):
    pass


class MarginError(ValueError):
    pass


@dataclass(frozen=True)
class MacroProfile:
    name: str
    P: Callable                  # vectorized xi -> P(xi)
    alpha: float                 # sup_{xi != 0} |P'| + |P''|
    beta: float                  # one-sided slope jump at 0
    interface_class: str         # "moving" | "standing"

    def validate(self, L: float, n: int = 4001) -> None:
        """Numerical check of the profile conditions on [-L, L]."""
        xi_l = np.linspace(-L, -1e-9, n)
        xi_r = np.linspace(1e-9, L, n)
        Pl, Pr = self.P(xi_l), self.P(xi_r)
        if not (np.all(np.isfinite(Pl)) and np.all(np.isfinite(Pr))):
            raise ProfileDataError("profile not finite on the window")
        if abs(float(self.P(np.array([-1e-9]))[0]) - float(self.P(np.array([1e-9]))[0])) > 1e-6:
            raise ProfileDataError("profile discontinuous at the interface")
        if np.any(Pr >= 1.0) or np.any(Pr <= -1.0):
            raise ProfileDataError("profile must stay in (-1, 1) right of the interface")
        if self.interface_class == "moving":
            if np.any(Pl <= 1.0):
                raise ProfileDataError("moving-class profile must exceed 1 left of the interface")
        elif self.interface_class == "standing":
            if np.any(Pl >= 1.0) or np.any(Pl <= -1.0):
                raise ProfileDataError("standing-class profile must stay in (-1, 1)")
        else:
            raise ProfileDataError(f"unknown interface class {self.interface_class!r}")


def moving_profile(a: float = 4.0, ramp_scale: float = 2.5, b: float = 0.4,
                   p_inf: float = -0.5) -> MacroProfile:
    """Kinked profile driving a steadily moving interface.

    Left of 0 the field rises along a saturated linear ramp
    1 + a*ramp_scale*tanh(-xi/ramp_scale) (slope -a at the kink, nearly
    linear over several units, flat far out), right of 0 it decays to p_inf
    with gentle rate b; slope jump beta = a - b(1-p_inf) > 0.  Linear pieces
    are invariant under heat flow, so the driving gradient, and with it the
    interface speed close to a/2, persists over the whole run instead of
    decaying with the kink relaxation.
    """
    if not (a > 0 and b > 0 and ramp_scale > 0 and -1.0 < p_inf < 1.0):
        raise ProfileDataError("need a, b, ramp_scale > 0 and p_inf in (-1, 1)")
    beta = a - b * (1.0 - p_inf)
    if beta <= 0:
        raise ProfileDataError("slope jump must be positive for the moving class")

    def P(xi):
        xi = np.asarray(xi, dtype=float)
        left = 1.0 + a * ramp_scale * np.tanh(-xi / ramp_scale)
        right = p_inf + (1.0 - p_inf) * np.exp(-b * xi)
        return np.where(xi <= 0.0, left, right)

    xs = np.linspace(1e-6, 12.0, 4001)
    d1_l = a / np.cosh(xs / ramp_scale) ** 2
    d2_l = (2.0 * a / ramp_scale) * np.abs(np.tanh(xs / ramp_scale)) / np.cosh(xs / ramp_scale) ** 2
    d1_r = b * (1.0 - p_inf) * np.exp(-b * xs)
    d2_r = b * d1_r
    alpha = float(max((d1_l + d2_l).max(), (d1_r + d2_r).max()))
    return MacroProfile(name=f"moving(a={a},ramp={ramp_scale},b={b},p_inf={p_inf})", P=P,
                        alpha=alpha, beta=beta, interface_class="moving")


def standing_profile(level: float = 0.5, amp: float = 0.4, rate: float = 2.0) -> MacroProfile:
    """Smooth profile level - amp*tanh(rate*xi); all data stay below u = 2, so no events occur."""
    if not (amp > 0 and 0 < level - amp and level + amp < 1):
        raise ProfileDataError("standing profile must stay inside (0, 1)")

    def P(xi):
        return level - amp * np.tanh(rate * np.asarray(xi, dtype=float))

    # |P'| <= amp*rate, |P''| <= amp*rate^2 * max|2 sech^2 tanh| = amp*rate^2*4/(3 sqrt 3)
    alpha = amp * rate + amp * rate * rate * 4.0 / (3.0 * math.sqrt(3.0))
    return MacroProfile(name=f"standing(level={level},amp={amp},rate={rate})", P=P,
                        alpha=alpha, beta=0.0, interface_class="standing")


def window_margin_sites(t_end: float, extra: int = 50) -> int:
    """Sites to keep between resolved data and the window wall so kernel tails stay < 1e-12."""
    return int(math.ceil(10.0 * math.sqrt(max(t_end, 1.0)))) + extra


@dataclass
class MacroInitialData:
    profile: MacroProfile
    eps: float
    c_eps: float
    alpha: float
    beta: float
    alpha_data: float
    beta_data: float
    j_lo: int
    j_hi: int
    checks: dict = field(default_factory=dict)

    def p0_at(self, js: np.ndarray) -> np.ndarray:
        """Initial p on arbitrary absolute sites from the profile formula."""
        return self.profile.P(self.eps * np.asarray(js, dtype=float)) + self.c_eps


def build_initial_data(profile: MacroProfile, eps: float, tau_fin: float,
                       L_macro: float = 6.0, travel_sites: int | None = None,
                       validate_L: float | None = None) -> tuple[SingleInterfaceState, MacroInitialData]:
    """Discretize a profile into a single-interface window state for the given eps.

    The window covers [-L_macro, L_macro] in macroscopic coordinates plus a
    kernel-tail margin on both sides and a travel allowance on the right;
    the three discrete smallness conditions are asserted at build time.
    """
    if eps <= 0 or tau_fin <= 0:
        raise ProfileDataError("eps and tau_fin must be positive")
    profile.validate(validate_L if validate_L is not None else L_macro)

    t_end = tau_fin / eps**2
    margin = window_margin_sites(t_end)
    if travel_sites is None:
        # crude speed estimate beta/2 from the limit dynamics, padded generously
        travel_sites = int(math.ceil(1.5 * (profile.beta + 1.0) * tau_fin / (2.0 * eps))) + 20
    n_core = int(round(L_macro / eps))
    j_lo = -(n_core + margin)
    j_hi = n_core + margin + travel_sites
    js = np.arange(j_lo, j_hi + 1)

    P_vals = profile.P(eps * js.astype(float))
    # keep u_j < 0 for j >= 1: c below half the distance of P to 1 on the right
    margin_right = 1.0 - float(P_vals[js >= 1].max())
    if margin_right <= 0:
        raise MarginError("no room for a positive offset right of the interface")
    c_eps = min(eps, 0.5 * margin_right)
    if profile.interface_class == "standing":
        margin_left = 1.0 - float(P_vals[js <= 0].max())
        if margin_left <= 0:
            raise MarginError("standing data would exceed u = 2")
        c_eps = min(c_eps, 0.5 * margin_left)

    p0 = P_vals + c_eps
    sgn = np.where(js <= 0, 1.0, -1.0)
    u0 = p0 + sgn
    k_local = int(np.searchsorted(js, 1))
    state = SingleInterfaceState.from_initial(u0, k_local, j_lo=j_lo)

    # discrete smallness conditions, on the formula-extended stencil
    js_ext = np.arange(j_lo - 1, j_hi + 2)
    p_ext = profile.P(eps * js_ext.astype(float)) + c_eps
    lap = p_ext[2:] - 2.0 * p_ext[1:-1] + p_ext[:-2]
    grad = np.diff(p_ext)
    i0 = int(np.searchsorted(js, 0))
    alpha, beta = profile.alpha, profile.beta
    beta_data = abs(float(lap[i0])) / eps
    off0 = np.abs(np.delete(lap, i0))
    alpha_data = max(float(np.abs(grad).max()) / eps, float(off0.max()) / eps**2)
    checks = {
        "lap_p0_bound": (abs(float(lap[i0])), beta * eps + alpha * eps**2),
        "grad_bound": (float(np.abs(grad).max()), alpha * eps),
        "lap_offsite_bound": (float(off0.max()), alpha * eps**2),
    }
    for name, (val, bound) in checks.items():
        if val > bound * (1.0 + 1e-12):
            raise ProfileDataError(f"smallness check {name} failed: {val:.3e} > {bound:.3e}")

    info = MacroInitialData(
        profile=profile, eps=eps, c_eps=c_eps, alpha=alpha, beta=beta,
        alpha_data=alpha_data, beta_data=beta_data, j_lo=j_lo, j_hi=j_hi, checks=checks,
    )
    return state, info
