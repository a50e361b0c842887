"""Qualitative lattice experiments with the smooth demonstration potential.

Each preset builds seeded initial data on a finite lattice j = -N..N with
eps = 1/N, runs the guarded Euler integrator, and evaluates an automatic
qualitative assertion: collision and disappearance of two interfaces
(annihilation), a moving interface that stops (pinning), a standing
interface that starts to move (depinning), and the two-point structure of
the oscillatory side of an interface after spinodal decomposition
(type-II).  Interface positions are read from windowed medians of the phase
indicator so single-step jitter cannot flip an assertion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .integrator import EulerConfig, Trajectory, run, stability_dt
from .lattice import LatticeState, neumann
from .potentials import Potential, smooth_demo, stable_branch_inverse

__all__ = [
    "PresetResult",
    "run_preset",
    "PRESET_NAMES",
    "phase_regions",
    "interface_positions",
    "two_point_support_distance",
]

PRESET_NAMES = (
    "transient-two-phase",
    "transient-spinodal",
    "annihilation",
    "pinning",
    "depinning",
    "type-II",
)


class PresetError(ValueError):
    pass


@dataclass
class PresetResult:
    name: str
    eps: float
    pot: Potential
    traj: Trajectory
    checks: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.get("ok", False) for v in self.checks.values())


def phase_regions(u: np.ndarray, pot: Potential) -> list[tuple[int, int, int]]:
    """Maximal runs of one phase: list of (sign, start, stop); spinodal sites are skipped."""
    phase = np.zeros(u.size, dtype=int)
    phase[u > pot.u_star_hi] = 1
    phase[u < pot.u_star_lo] = -1
    regions = []
    cur_sign, start = 0, None
    for i, s in enumerate(phase):
        if s == 0:
            continue
        if s != cur_sign:
            regions.append((s, i, i))
            cur_sign = s
        else:
            sign, a, _ = regions[-1]
            regions[-1] = (sign, a, i)
    return regions


def interface_positions(u: np.ndarray, pot: Potential, eps: float) -> list[float]:
    """Positions (macroscopic) between adjacent opposite-phase regions."""
    regions = phase_regions(u, pot)
    N = (u.size - 1) // 2
    out = []
    for (s1, _, stop1), (s2, start2, _) in zip(regions, regions[1:]):
        if s1 != s2:
            out.append(eps * (0.5 * (stop1 + start2) - N))
    return out


def _median_positions(traj: Trajectory, pot: Potential, eps: float,
                      which: int = 0, window: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Interface position per snapshot, median-filtered over `window` snapshots."""
    taus, pos = [], []
    for t, u in traj.snapshots:
        ps = interface_positions(u, pot, eps)
        if len(ps) > which:
            taus.append(eps * eps * t)
            pos.append(ps[which])
    taus, pos = np.array(taus), np.array(pos)
    if pos.size >= window:
        sm = np.copy(pos)
        h = window // 2
        for i in range(pos.size):
            sm[i] = np.median(pos[max(0, i - h):i + h + 1])
        pos = sm
    return taus, pos


def two_point_support_distance(u: np.ndarray, p: np.ndarray, pot: Potential,
                               sites: np.ndarray, smooth: int = 5) -> float:
    """Max distance of u_j to the two stable branch values of the macroscopic p.

    p is smoothed over `smooth` sites first: the oscillatory side of a
    type-II interface carries one continuous macroscopic derivative field,
    and the site values must sit on its two stable branch preimages.  (With
    the raw pointwise p the check would be circular: u_j outside the
    spinodal always inverts its own p_j exactly.)
    """
    if smooth > 1:
        kern = np.ones(smooth) / smooth
        pad = smooth // 2
        p = np.convolve(np.concatenate([p[:1].repeat(pad), p, p[-1:].repeat(pad)]),
                        kern, mode="valid")
    worst = 0.0
    for j in sites:
        candidates = []
        for branch in ("lo", "hi"):
            try:
                candidates.append(stable_branch_inverse(pot, float(p[j]), branch))
            except ValueError:
                pass
        if not candidates:
            return float("inf")
        worst = max(worst, min(abs(float(u[j]) - c) for c in candidates))
    return worst


def branch_oscillation_fraction(u: np.ndarray, pot: Potential, sites: np.ndarray) -> float:
    """Fraction of adjacent site pairs assigned to opposite stable branches."""
    mid = 0.5 * (pot.u_star_lo + pot.u_star_hi)
    sign = np.sign(u[sites] - mid)
    flips = np.abs(np.diff(sign)) > 0
    return float(flips.mean()) if flips.size else 0.0


def _tanh_step(xi, center, width):
    return np.tanh((xi - center) / width)


def _build_initial(name: str, N: int, pot: Potential, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    xi = np.arange(-N, N + 1) / N
    us, uh = pot.u_star_hi, pot.u_hash_hi
    if name == "transient-two-phase":
        left = rng.uniform(us + 0.15, uh - 0.1, size=xi.size)
        right = rng.uniform(-uh + 0.1, -us - 0.15, size=xi.size)
        return np.where(xi < 0.0, left, right)
    if name == "transient-spinodal":
        base = -0.9 * _tanh_step(xi, 0.0, 0.45)
        noise = rng.uniform(-0.35, 0.35, size=xi.size)
        return base + noise
    if name == "annihilation":
        # moving interface at 0 (driven from a reservoir with U > u_hash that
        # ramps up leftward, sustaining the flux), standing one at 0.6
        left = 2.2 + 2.5 * np.maximum(-xi, 0.0)
        u0 = np.where(xi < 0.0, left, np.where(xi < 0.6, -0.7, 0.85))
        return _smooth(u0, 3)
    if name == "pinning":
        # supercritical bump behind the interface at 0 drives it briefly; the
        # sub-marginal base level pins it once the bump drains
        bump = 1.6 * np.exp(-((xi + 0.08) / 0.2) ** 2)
        u0 = np.where(xi < 0.0, 1.3 + bump, -0.65)
        return _smooth(u0, 3)
    if name == "depinning":
        # standing start: P at the interface inside (p_*, p^*); a reservoir on
        # the far left raises it past p^* by bulk diffusion
        u0 = np.where(xi < -0.3, 2.8, np.where(xi < 0.0, 1.5, -1.2))
        return _smooth(u0, 5)
    if name == "type-II":
        u0 = 1.1 - 1.45 * _tanh_step(xi, 0.1, 0.35)
        return u0 + rng.uniform(-0.02, 0.02, size=xi.size)
    raise PresetError(f"unknown preset {name!r}")


def _smooth(u: np.ndarray, passes: int) -> np.ndarray:
    for _ in range(passes):
        u = np.convolve(np.concatenate([[u[0]], u, [u[-1]]]),
                        [0.25, 0.5, 0.25], mode="valid")
    return u


_PRESET_N = {
    "transient-two-phase": 50,
    "transient-spinodal": 50,
    "annihilation": 200,
    "pinning": 400,
    "depinning": 500,
    "type-II": 50,
}

_PRESET_TAU_END = {
    "transient-two-phase": 0.004,
    "transient-spinodal": 0.004,
    "annihilation": 0.26,
    "pinning": 0.08,
    "depinning": 0.08,
    "type-II": 0.05,
}


def run_preset(name: str, N: int | None = None, seed: int = 20240901,
               n_snapshots: int = 60) -> PresetResult:
    """Run one named experiment and evaluate its qualitative check."""
    if name not in PRESET_NAMES:
        raise PresetError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    pot = smooth_demo()
    N = N or _PRESET_N[name]
    eps = 1.0 / N
    tau_end = _PRESET_TAU_END[name]
    t_end = tau_end / eps**2
    u0 = _build_initial(name, N, pot, seed)
    state = LatticeState(0.0, u0, neumann())
    lo, hi = float(u0.min()) - 0.5, float(u0.max()) + 0.5
    dt0 = stability_dt(pot, (min(lo, -abs(hi)), max(hi, abs(lo))))
    snaps = np.linspace(0.0, t_end, n_snapshots + 1)[1:]
    cfg = EulerConfig(dt0=dt0, t_end=t_end, snapshot_times=tuple(snaps))
    traj = run(state, pot, cfg, eps)
    result = PresetResult(name=name, eps=eps, pot=pot, traj=traj,
                          meta={"N": N, "seed": seed, "dt0": dt0, "tau_end": tau_end})
    _evaluate(result)
    return result


def _evaluate(res: PresetResult) -> None:
    pot, eps, traj = res.pot, res.eps, res.traj
    name = res.name
    tau_of = lambda t: eps * eps * t

    if name in ("transient-two-phase", "transient-spinodal"):
        t0p = 0.002 / eps**2
        u = _snapshot_at(traj, t0p)
        inside = np.sum((u > pot.u_star_lo + 0.05) & (u < pot.u_star_hi - 0.05))
        res.checks["spinodal_exit"] = {
            "ok": bool(inside == 0),
            "sites_still_inside": int(inside),
            "tau": 0.002,
        }
        if name == "transient-spinodal":
            p = pot.dphi(u)
            osc = np.where(np.abs(np.diff(np.sign(u))) > 0)[0]
            res.checks["oscillatory_sites_exist"] = {"ok": bool(osc.size > 0)}
        return

    if name == "annihilation":
        taus, counts = [], []
        for t, u in traj.snapshots:
            regions = phase_regions(u, pot)
            taus.append(tau_of(t))
            counts.append(len(regions))
        taus = np.array(taus)
        counts = np.array(counts)
        started_with = counts[0]
        merged = np.where(counts <= 1)[0]
        tau_collision = float(taus[merged[0]]) if merged.size else None
        res.checks["annihilation"] = {
            "ok": bool(started_with >= 3 and tau_collision is not None
                       and abs(tau_collision - 0.18) <= 0.05),
            "tau_collision": tau_collision,
            "initial_region_count": int(started_with),
        }
        return

    if name == "pinning":
        taus, pos = _median_positions(traj, pot, eps)
        moved = pos - pos[0]
        final = pos[-1]
        settled = np.abs(pos - final) <= 1.5 * eps
        idx = np.where(~settled)[0]
        tau_stop = float(taus[idx[-1] + 1]) if idx.size and idx[-1] + 1 < taus.size else 0.0
        res.checks["pinning"] = {
            "ok": bool(moved.max() >= 3 * eps and tau_stop <= 0.05),
            "max_travel": float(moved.max()),
            "tau_stop": tau_stop,
        }
        return

    if name == "depinning":
        taus, pos = _median_positions(traj, pot, eps)
        still = np.abs(pos - pos[0]) <= 1.5 * eps
        idx_move = np.where(~still)[0]
        tau_depin = float(taus[idx_move[0]]) if idx_move.size else None
        travel_after = float(pos[-1] - pos[0])
        res.checks["depinning"] = {
            "ok": bool(tau_depin is not None and tau_depin >= 0.004
                       and travel_after >= 4 * eps
                       and _is_nondecreasing(pos, tol=1.5 * eps)),
            "tau_depin": tau_depin,
            "travel": travel_after,
        }
        return

    if name == "type-II":
        t0p = 0.002 / eps**2
        u = _snapshot_at(traj, t0p)
        p = pot.dphi(u)
        regions = phase_regions(u, pot)
        # oscillatory side: right of the leftmost interface
        if len(regions) < 2:
            res.checks["two_point_support"] = {"ok": False, "reason": "no interface formed"}
            return
        start = regions[1][1]
        sites = np.arange(start, u.size)
        dist = two_point_support_distance(u, p, pot, sites)
        osc = branch_oscillation_fraction(u, pot, sites)
        res.checks["two_point_support"] = {
            "ok": bool(dist <= 0.05 and osc >= 0.15),
            "max_distance": dist,
            "oscillation_fraction": osc,
        }
        return


def _snapshot_at(traj: Trajectory, t: float) -> np.ndarray:
    ts = np.array([s for s, _ in traj.snapshots])
    i = int(np.argmin(np.abs(ts - t)))
    return traj.snapshots[i][1]


def _is_nondecreasing(pos: np.ndarray, tol: float) -> bool:
    running = np.maximum.accumulate(pos)
    return bool(np.all(pos >= running - tol))
