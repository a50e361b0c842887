"""Explicit Euler time stepping for the general bistable lattice.

Step control follows the energy functional rather than a local error
estimate: a step is accepted only if the energy strictly decreases, and a
rejected step is retried with a smaller dt.  Snapshot times are hit exactly
by shrinking the final step before each of them, so recorded data is
reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeState, energy, dissipation, rhs
from .potentials import Potential

__all__ = ["EulerConfig", "Trajectory", "euler_step", "run", "stability_dt", "GuardFailure"]


class GuardFailure(RuntimeError):
    """dt underflowed dt_min while trying to decrease the energy."""

    def __init__(self, msg: str, state: LatticeState):
        super().__init__(msg)
        self.state = state


class NumericalOverflow(RuntimeError):
    """A step produced non-finite site values (dt too large)."""


@dataclass(frozen=True)
class EulerConfig:
    dt0: float
    t_end: float
    dt_min: float = 1e-12
    energy_guard: bool = True
    safety: float = 0.5
    snapshot_times: tuple = ()
    record_every: int = 0  # additionally record every n-th accepted step (0: snapshots only)

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt0):
            raise ValueError("need 0 < dt_min <= dt0")
        if not (0.0 < self.safety < 1.0):
            raise ValueError("safety must lie in (0, 1)")


@dataclass
class Trajectory:
    snapshots: list = field(default_factory=list)    # (t, u array)
    energies: list = field(default_factory=list)     # (t, E) per accepted step
    dissipations: list = field(default_factory=list)  # (t, D) per accepted step

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.snapshots])

    def u_at(self, t: float) -> np.ndarray:
        for ts, u in self.snapshots:
            if abs(ts - t) <= 1e-12 * max(1.0, abs(t)):
                return u
        raise KeyError(f"no snapshot recorded at t={t}")


def euler_step(state: LatticeState, pot: Potential, dt: float) -> LatticeState:
    """Single explicit Euler step u <- u + dt * lap dphi(u)."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    u_new = state.u + dt * rhs(state, pot)
    if not np.all(np.isfinite(u_new)):
        raise NumericalOverflow(f"non-finite site values after step of dt={dt}")
    return state.with_u(u_new, t=state.t + dt)


def stability_dt(pot: Potential, window: tuple[float, float], n_sample: int = 4001) -> float:
    """Conservative explicit step size 1/(4 L) with L = sup |phi''| over the window.

    The linearized operator has Gershgorin bound 4 L, so linear stability
    allows dt <= 1/(2 L); an extra factor 2 is kept as margin.
    """
    if pot.kind == "piecewise-quadratic":
        return 0.25
    lo, hi = window
    grid = np.linspace(lo, hi, n_sample)
    if pot.d2phi is not None:
        L = float(np.abs(pot.d2phi(grid)).max())
    else:
        h = (hi - lo) / (n_sample - 1)
        L = float(np.abs(np.gradient(pot.dphi(grid), h)).max())
    return 1.0 / (4.0 * L)


def run(initial: LatticeState, pot: Potential, cfg: EulerConfig, eps: float) -> Trajectory:
    """Integrate to t_end recording snapshots at the requested times.

    With the energy guard on, each accepted step strictly decreases the
    energy (tolerance 1e-14 |E|); on rejection dt is scaled by ``safety``
    and recovers geometrically toward dt0 after accepted steps.  States at
    an exact equilibrium (zero right-hand side) are fast-forwarded.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    snap_times = sorted(set(float(s) for s in cfg.snapshot_times if initial.t < s <= cfg.t_end))
    traj = Trajectory()
    from .lattice import _p_bc
    bc_state = initial.bc
    bc = _p_bc(initial.bc, pot)  # ghost padding acts on the p-array
    phi, dphi = pot.phi, pot.dphi

    # hot loop on raw arrays; LatticeState objects are built only for records
    u = initial.u.copy()
    t = initial.t
    E = float(eps * phi(u).sum())

    def diss(x):
        p = dphi(x)
        pad = bc.ghost_pad(p)
        d = pad[2:] - pad[1:-1]
        return float(np.dot(d, d) / eps)

    def record(arr):
        a = arr.copy()
        a.setflags(write=False)
        return a

    traj.snapshots.append((t, record(u)))
    traj.energies.append((t, E))
    traj.dissipations.append((t, diss(u)))

    dt = cfg.dt0
    pending = list(snap_times)
    step_count = 0
    dt_sliver = max(cfg.dt_min, 1e-9 * cfg.dt0)
    t_limit = cfg.t_end - 1e-15 * max(1.0, cfg.t_end)
    while t < t_limit:
        t_target = pending[0] if pending else cfg.t_end
        remaining = t_target - t
        # land on the target in one step rather than leaving a sliver behind
        dt_eff = remaining if remaining <= 1.5 * dt else dt
        while True:
            if dt_eff <= dt_sliver:
                # time relabeling: a sliver step changes nothing measurable
                u_new = u
                E_new = E
                break
            pad = bc.ghost_pad(dphi(u))
            u_new = u + dt_eff * (pad[2:] - 2.0 * pad[1:-1] + pad[:-2])
            E_new = float(eps * phi(u_new).sum())
            if not np.isfinite(E_new) or not np.all(np.isfinite(u_new)):
                raise NumericalOverflow(f"non-finite site values after step of dt={dt_eff}")
            if not cfg.energy_guard:
                break
            if E_new < E - 1e-14 * abs(E):
                break
            if np.array_equal(u_new, u):
                # exact equilibrium: nothing will change, jump ahead
                u_new = u
                E_new = E
                break
            dt *= cfg.safety
            if dt < cfg.dt_min:
                raise GuardFailure(
                    f"energy guard failed at t={t:.6g}: dt underflowed {cfg.dt_min:g}",
                    LatticeState(t, u, bc_state),
                )
            remaining = t_target - t
            dt_eff = remaining if remaining <= 1.5 * dt else dt
        u = u_new
        t = t + dt_eff
        E_prev, E = E, E_new
        step_count += 1
        landed = abs(t - t_target) <= 1e-14 * max(1.0, t_target)
        if landed:
            t = t_target
        if E < E_prev or not cfg.energy_guard:
            traj.energies.append((t, E))
        recorded = False
        if landed and pending and t_target == pending[0]:
            traj.snapshots.append((t, record(u)))
            pending.pop(0)
            recorded = True
        elif cfg.record_every and step_count % cfg.record_every == 0:
            traj.snapshots.append((t, record(u)))
            recorded = True
        if recorded:
            traj.dissipations.append((t, diss(u)))
        # recover dt toward dt0 over a few accepted steps
        dt = min(cfg.dt0, dt * cfg.safety ** -0.25)
    if not traj.snapshots or traj.snapshots[-1][0] != t:
        traj.snapshots.append((t, record(u)))
    return traj
