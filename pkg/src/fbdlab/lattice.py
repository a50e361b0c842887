"""Lattice states, discrete operators, and energy/dissipation functionals.

All operations are pure functions of immutable value objects.  Boundary
conditions are realized through ghost cells: Neumann copies the edge value,
Dirichlet holds fixed constants, and the window condition extends by the
edge constants (identical to Neumann for the Laplacian stencil but marking
that the state is a window into an infinite lattice).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.fft import dct, idct

from .potentials import Potential

__all__ = [
    "BoundaryCondition",
    "neumann",
    "dirichlet",
    "window",
    "LatticeState",
    "discrete_laplacian",
    "rhs",
    "energy",
    "dissipation",
    "metric_potential",
    "comparison_bounds",
    "entropy_production",
    "forward_diff",
]


class LatticeError(ValueError):
    """Invalid lattice state or operator input."""


class CompatibilityError(LatticeError):
    """Right-hand side incompatible with the Neumann Poisson solve."""


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str  # "neumann" | "dirichlet" | "window"
    c1: float = 0.0
    c2: float = 0.0

    def ghost_pad(self, x: np.ndarray) -> np.ndarray:
        """Return x with one ghost value prepended and appended."""
        if self.kind in ("neumann", "window"):
            return np.concatenate(([x[0]], x, [x[-1]]))
        if self.kind == "dirichlet":
            return np.concatenate(([self.c1], x, [self.c2]))
        raise LatticeError(f"unknown boundary condition {self.kind!r}")


def neumann() -> BoundaryCondition:
    return BoundaryCondition("neumann")


def dirichlet(c1: float, c2: float) -> BoundaryCondition:
    return BoundaryCondition("dirichlet", c1, c2)


def window() -> BoundaryCondition:
    return BoundaryCondition("window")


@dataclass(frozen=True)
class LatticeState:
    """Microscopic time plus site values on a finite index window."""

    t: float
    u: np.ndarray
    bc: BoundaryCondition

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 1 or u.size < 3:
            raise LatticeError("lattice state needs a 1-d window of length >= 3")
        if not np.all(np.isfinite(u)):
            raise LatticeError("lattice state contains non-finite entries")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    def with_u(self, u: np.ndarray, t: float | None = None) -> "LatticeState":
        return LatticeState(self.t if t is None else t, u, self.bc)


def discrete_laplacian(p: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    """Standard second difference p_{j+1} - 2 p_j + p_{j-1} with ghost values per bc."""
    p = np.asarray(p, dtype=float)
    if p.size == 0:
        raise LatticeError("empty input to discrete_laplacian")
    if p.size == 1:
        pad = bc.ghost_pad(p)
        return np.array([pad[2] - 2.0 * pad[1] + pad[0]])
    pad = bc.ghost_pad(p)
    return pad[2:] - 2.0 * pad[1:-1] + pad[:-2]


def forward_diff(x: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    """Right difference x_{j+1} - x_j including the ghost term at the right edge."""
    pad = bc.ghost_pad(np.asarray(x, dtype=float))
    return pad[2:] - pad[1:-1]


def rhs(state: LatticeState, pot: Potential) -> np.ndarray:
    """Time derivative of the diffusion lattice: Laplacian of dphi(u), sitewise.

    Dirichlet ghost constants are u-values, so the p-array is padded with
    dphi of them; Neumann/window ghost copies commute with dphi.
    """
    return discrete_laplacian(pot.dphi(state.u), _p_bc(state.bc, pot))


def _p_bc(bc: BoundaryCondition, pot: Potential) -> BoundaryCondition:
    if bc.kind == "dirichlet":
        return BoundaryCondition("dirichlet", float(pot.dphi(bc.c1)), float(pot.dphi(bc.c2)))
    return bc


def energy(state: LatticeState, pot: Potential, eps: float) -> float:
    """eps * sum Phi(u_j)."""
    if eps <= 0:
        raise LatticeError("eps must be positive")
    return float(eps * np.sum(pot.phi(state.u)))


def dissipation(state: LatticeState, pot: Potential, eps: float) -> float:
    """eps^{-1} * sum (forward difference of dphi(u))^2 with ghost extension."""
    if eps <= 0:
        raise LatticeError("eps must be positive")
    d = forward_diff(pot.dphi(state.u), _p_bc(state.bc, pot))
    return float(np.sum(d * d) / eps)


def metric_potential(udot: np.ndarray, eps: float = 1.0, tol: float = 1e-10) -> float:
    """Squared metric length of a velocity: solve -lap v = udot (Neumann), return (eps/2) sum (grad v)^2.

    The Neumann Poisson problem requires sum(udot) = 0; the additive gauge is
    fixed by zero mean of v (only the gradient enters the value).
    """
    udot = np.asarray(udot, dtype=float)
    if abs(float(np.sum(udot))) > tol:
        raise CompatibilityError(
            f"sum(udot) = {float(np.sum(udot)):.3e} exceeds Neumann compatibility tolerance {tol:g}"
        )
    m = udot.size
    lam = -4.0 * np.sin(np.pi * np.arange(m) / (2.0 * m)) ** 2
    uhat = dct(udot, type=2, norm="ortho")
    vhat = np.zeros_like(uhat)
    vhat[1:] = uhat[1:] / (-lam[1:])
    v = idct(vhat, type=2, norm="ortho")
    dv = forward_diff(v, neumann())
    return float(0.5 * eps * np.sum(dv * dv))


def comparison_bounds(initial: LatticeState, pot: Potential) -> tuple[float, float]:
    """A priori trajectory bounds (lower, upper) from the comparison principle."""
    lo = min(pot.u_hash_lo, float(initial.u.min()))
    hi = max(pot.u_hash_hi, float(initial.u.max()))
    return lo, hi


def entropy_production(state: LatticeState, pot: Potential,
                       upsilon: Callable) -> np.ndarray:
    """Per-site entropy dissipation (forward diff of upsilon(p)) * (forward diff of p).

    Nonnegative sitewise for any increasing upsilon; the summed inequality is
    the discrete counterpart of the entropy condition satisfied across
    interfaces.
    """
    pad_p = _p_bc(state.bc, pot).ghost_pad(pot.dphi(state.u))
    pad_up = np.asarray(upsilon(pad_p), dtype=float)
    dp = pad_p[2:] - pad_p[1:-1]
    dup = pad_up[2:] - pad_up[1:-1]
    return dup * dp
