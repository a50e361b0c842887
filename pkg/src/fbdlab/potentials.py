"""Double-well potentials and their landmark values.

A potential is described by Phi and its derivative dphi = Phi'.  The
derivative is bistable: increasing on the two outer (stable) branches and
decreasing on the inner (unstable) branch between the spinodal points
u_star_lo <= u_star_hi.  The critical derivative values

    p_star_lo = dphi(u_star_hi),    p_star_hi = dphi(u_star_lo)

bound the derivative range on which an interface can stand still, and
u_hash_lo < u_star_lo, u_hash_hi > u_star_hi are the outer points where the
stable branches attain those critical values.

For the piecewise-quadratic potential the spinodal interval degenerates to
the single point u = 0 and dphi(u) = u - sgn(u) with the one-sided
convention sgn(0) = +1, so dphi(0) = -1 exactly.  The convention selects
rightward interface propagation and is encoded here so every consumer
inherits it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "Potential",
    "piecewise_quadratic",
    "smooth_demo",
    "custom_potential",
    "stable_branch_inverse",
]


@dataclass(frozen=True)
class Potential:
    """Immutable double-well potential with precomputed landmark values."""

    kind: str
    phi: Callable
    dphi: Callable
    u_star_lo: float
    u_star_hi: float
    u_hash_lo: float
    u_hash_hi: float
    p_star_lo: float
    p_star_hi: float
    d2phi: Callable | None = field(default=None, repr=False)

    def check_bistable(self, lo: float = -4.0, hi: float = 4.0, n: int = 2001) -> None:
        """Sample dphi and verify the increasing/decreasing branch pattern.

        Raises ValueError on a violation.  The spinodal interval itself is
        skipped for degenerate potentials (u_star_lo == u_star_hi).
        """
        eps = 1e-9
        left = np.linspace(lo, self.u_star_lo - eps, n)
        right = np.linspace(self.u_star_hi + eps, hi, n)
        for branch, name in ((left, "left"), (right, "right")):
            vals = self.dphi(branch)
            if np.any(np.diff(vals) <= 0):
                raise ValueError(f"dphi not increasing on {name} stable branch")
        if self.u_star_hi - self.u_star_lo > 1e-12:
            mid = np.linspace(self.u_star_lo + eps, self.u_star_hi - eps, n)
            vals = self.dphi(mid)
            if np.any(np.diff(vals) >= 0):
                raise ValueError("dphi not decreasing on the unstable branch")


def _pw_phi(u):
    u = np.asarray(u, dtype=float)
    return 0.5 * np.minimum((u - 1.0) ** 2, (u + 1.0) ** 2)


def _pw_dphi(u):
    # sgn(0) = +1: the u >= 0 branch is u - 1, so dphi(0) = -1 exactly.
    u = np.asarray(u, dtype=float)
    return np.where(u >= 0.0, u - 1.0, u + 1.0)


def piecewise_quadratic() -> Potential:
    """Degenerate double well 0.5*min{(u-1)^2, (u+1)^2}; dphi(u) = u - sgn(u)."""
    return Potential(
        kind="piecewise-quadratic",
        phi=_pw_phi,
        dphi=_pw_dphi,
        u_star_lo=0.0,
        u_star_hi=0.0,
        u_hash_lo=-2.0,
        u_hash_hi=2.0,
        p_star_lo=-1.0,
        p_star_hi=1.0,
        d2phi=lambda u: np.ones_like(np.asarray(u, dtype=float)),
    )


def _demo_phi(u):
    u = np.asarray(u, dtype=float)
    return 2.0 * (1.0 - u**2) ** 2 / (1.0 + u**2)


def _demo_dphi(u):
    u = np.asarray(u, dtype=float)
    return 4.0 * u - 16.0 * u / (1.0 + u**2) ** 2


def _demo_d2phi(u):
    u = np.asarray(u, dtype=float)
    return 4.0 - 16.0 * (1.0 - 3.0 * u**2) / (1.0 + u**2) ** 3


def smooth_demo() -> Potential:
    """Smooth double well 2(1-u^2)^2/(1+u^2) with linearly growing derivative.

    Landmark values are located once at construction by root finding on the
    analytic second derivative.
    """
    u_hi = brentq(_demo_d2phi, 1e-8, 1.0, xtol=1e-14)
    p_hi = float(_demo_dphi(-u_hi))
    u_hash_hi = brentq(lambda u: _demo_dphi(u) - p_hi, u_hi, 50.0, xtol=1e-14)
    return Potential(
        kind="smooth-demo",
        phi=_demo_phi,
        dphi=_demo_dphi,
        u_star_lo=-u_hi,
        u_star_hi=u_hi,
        u_hash_lo=-u_hash_hi,
        u_hash_hi=u_hash_hi,
        p_star_lo=float(_demo_dphi(u_hi)),
        p_star_hi=p_hi,
        d2phi=_demo_d2phi,
    )


def custom_potential(phi: Callable, dphi: Callable, search_lo: float = -10.0,
                     search_hi: float = 10.0, n_scan: int = 20001) -> Potential:
    """Build a Potential from user callables, locating landmarks numerically.

    Spinodal points are the sign changes of dphi', bracketed on a scan grid
    and refined by bisection to 1e-12.
    """
    grid = np.linspace(search_lo, search_hi, n_scan)
    h = (search_hi - search_lo) / (n_scan - 1)
    dp = np.asarray(dphi(grid), dtype=float)
    slope = np.diff(dp) / h

    sign = np.sign(slope)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if len(flips) != 2:
        raise ValueError(
            f"expected exactly 2 sign changes of dphi' in scan window, found {len(flips)}"
        )

    def num_d2(u, d=1e-6):
        return (np.asarray(dphi(u + d)) - np.asarray(dphi(u - d))) / (2 * d)

    roots = []
    for i in flips:
        roots.append(brentq(num_d2, grid[i], grid[i + 2], xtol=1e-12))
    u_lo, u_hi = sorted(roots)
    p_lo = float(dphi(u_hi))
    p_hi = float(dphi(u_lo))
    u_hash_lo = brentq(lambda u: dphi(u) - p_lo, search_lo, u_lo, xtol=1e-12)
    u_hash_hi = brentq(lambda u: dphi(u) - p_hi, u_hi, search_hi, xtol=1e-12)
    pot = Potential(
        kind="custom",
        phi=phi,
        dphi=dphi,
        u_star_lo=u_lo,
        u_star_hi=u_hi,
        u_hash_lo=u_hash_lo,
        u_hash_hi=u_hash_hi,
        p_star_lo=p_lo,
        p_star_hi=p_hi,
    )
    pot.check_bistable(search_lo, search_hi)
    return pot


def stable_branch_inverse(pot: Potential, p: float, branch: str) -> float:
    """Invert dphi on a stable branch: branch 'lo' is u <= u_star_lo, 'hi' is u >= u_star_hi.

    Raises ValueError when p is outside the branch range.
    """
    if branch == "lo":
        lo, hi = pot.u_star_lo - 60.0, pot.u_star_lo
    elif branch == "hi":
        lo, hi = pot.u_star_hi, pot.u_star_hi + 60.0
    else:
        raise ValueError(f"unknown branch {branch!r}")
    f = lambda u: float(pot.dphi(u)) - p
    if f(lo) * f(hi) > 0:
        raise ValueError(f"p={p} not attained on branch {branch!r}")
    return brentq(f, lo, hi, xtol=1e-12)
