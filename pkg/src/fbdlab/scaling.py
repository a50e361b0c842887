"""Macroscopic embeddings, the R-field split, and sweep diagnostics.

The lattice fields p, q, r are embedded as piecewise-constant space-time
functions P_eps, Q_eps, R_eps on a macroscopic (tau, xi) grid via
tau = eps^2 t, xi = eps j.  Q_eps is the heat-flow evolution of the initial
data, R_eps := P_eps - Q_eps (exact at sample points by construction), and
R_eps splits further into the tau-continuous part

    R1 = -2 sum_k H_eps(tau - tau*_k, xi - eps k)

built from the regularized kernel, plus the jump part R2 = R_eps - R1
supported on the short intervals [tau*_k, tau*_k + d_star eps].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .initial_data import MacroInitialData
from .kernel import KernelEvaluator, truncation_radius
from .single_interface import SingleInterfaceRun, TransitionLog, heat_convolution

__all__ = [
    "Embedding",
    "SplitFields",
    "build_embeddings",
    "split_R",
    "gap_statistics",
    "regular_part_bounds",
    "holder_diagnostics",
    "compare_to_limit",
]


class DStarError(ValueError):
    """Regularization intervals would overlap: d_star too large for the event gaps."""


@dataclass
class Embedding:
    eps: float
    tau_grid: np.ndarray
    js: np.ndarray               # absolute lattice columns; xi = eps * js
    P: np.ndarray                # [n_tau, n_j]
    Q: np.ndarray
    R: np.ndarray
    xi_star: np.ndarray          # step function on tau_grid
    tau_events: np.ndarray       # macroscopic transition times eps^2 t*_k
    k_events: np.ndarray         # absolute indices of transitioned sites
    meta: dict = field(default_factory=dict)

    @property
    def xi(self) -> np.ndarray:
        return self.eps * self.js


def build_embeddings(run: SingleInterfaceRun, log: TransitionLog, eps: float,
                     tau_grid: np.ndarray, js: np.ndarray | None = None,
                     ev: KernelEvaluator | None = None,
                     info: MacroInitialData | None = None,
                     xi_grid: np.ndarray | None = None) -> Embedding:
    """Sample p, q, and r = p - q on the macroscopic grid.

    Columns are given either as absolute lattice indices js or as
    macroscopic positions xi_grid, which are mapped to the nearest cell
    (the embedding is piecewise constant on cells of width eps); off-cell
    sampling is flagged in the metadata.  Columns must lie in the window.
    """
    ev = ev or KernelEvaluator()
    tau_grid = np.asarray(tau_grid, dtype=float)
    nearest_cell = False
    if js is None:
        if xi_grid is None:
            raise ValueError("provide either js or xi_grid")
        ratio = np.asarray(xi_grid, dtype=float) / eps
        js = np.round(ratio).astype(int)
        nearest_cell = bool(np.abs(ratio - js).max() > 1e-9)
    js = np.asarray(js, dtype=int)
    j_lo = run.initial.j_lo
    cols = js - j_lo
    if cols.min() < 0 or cols.max() >= run.initial.u.size:
        raise ValueError("embedding columns outside the run window")

    p0 = run.initial.p()
    n_tau, n_j = tau_grid.size, js.size
    P = np.empty((n_tau, n_j))
    Q = np.empty((n_tau, n_j))
    for i, tau in enumerate(tau_grid):
        t = tau / eps**2
        P[i] = run.p_at(t)[cols]
        Q[i] = heat_convolution(p0, t, ev)[cols]
    R = P - Q

    tau_events = eps**2 * log.times
    k_events = np.array([e.k for e in log.events], dtype=int)
    k1 = run.initial.k_abs
    xi_star = np.empty(n_tau)
    for i, tau in enumerate(tau_grid):
        n_done = int(np.searchsorted(tau_events, tau, side="right"))
        xi_star[i] = eps * (k1 - 1 + n_done)

    return Embedding(eps=eps, tau_grid=tau_grid, js=js, P=P, Q=Q, R=R,
                     xi_star=xi_star, tau_events=tau_events, k_events=k_events,
                     meta={"j_lo": j_lo, "window": run.initial.u.size,
                           "nearest_cell_sampling": nearest_cell})


@dataclass
class SplitFields:
    d_star: float
    R1: np.ndarray               # on the embedding grid
    R2: np.ndarray
    sup_R2: float
    sup_R2_outside: float
    l1_R2: float
    fitted_C_l1: float
    r1_l1_per_tau: np.ndarray    # ||R1(tau, .)||_L1 over the window
    r1_grad_l2_per_tau: np.ndarray
    interface_condition: np.ndarray  # Q + R1 - 1 at the event points


def _r1_at(tau: float, tau_events: np.ndarray, k_events: np.ndarray,
           js: np.ndarray, eps: float, d_star: float,
           ev: KernelEvaluator) -> np.ndarray:
    """R1(tau, eps*js) = -2 sum_k H_eps(tau - tau*_k, eps(js - k))."""
    out = np.zeros(js.size)
    knot = d_star * eps
    for tk, ke in zip(tau_events, k_events):
        s = tau - tk
        if s <= 0:
            continue
        offs = js - ke
        if s >= knot:
            out -= 2.0 * ev.g_many(offs, s / eps**2)
        else:
            out -= 2.0 * (s / knot) * ev.g_many(offs, knot / eps**2)
    return out


def split_R(emb: Embedding, d_star: float, ev: KernelEvaluator | None = None,
            run: SingleInterfaceRun | None = None, log: TransitionLog | None = None,
            support_tol: float = 1e-10, sup_tol: float = 1e-8,
            l1_quad_points: int = 16) -> SplitFields:
    """Build the R1/R2 split on the embedding grid and verify its bounds.

    Raises DStarError when the regularization intervals would overlap, and
    AssertionError when a verified bound fails (support of R2, sup bound 2).
    The L1 norm of R2 is computed by per-event quadrature of the closed-form
    jump part (the grid is generally too coarse to resolve the short support
    intervals).
    """
    ev = ev or KernelEvaluator()
    eps = emb.eps
    knot = d_star * eps
    if emb.tau_events.size > 1:
        min_gap = float(np.diff(emb.tau_events).min())
        if min_gap < knot:
            raise DStarError(f"event gap {min_gap:.3e} below d_star*eps = {knot:.3e}")

    R1 = np.empty_like(emb.R)
    for i, tau in enumerate(emb.tau_grid):
        R1[i] = _r1_at(tau, emb.tau_events, emb.k_events, emb.js, eps, d_star, ev)
    R2 = emb.R - R1

    # support: rows outside every interval [tau*_k, tau*_k + knot] must vanish
    outside = np.ones(emb.tau_grid.size, dtype=bool)
    for tk in emb.tau_events:
        inside = (emb.tau_grid >= tk - 1e-15) & (emb.tau_grid <= tk + knot + 1e-15)
        outside &= ~inside
    sup_outside = float(np.abs(R2[outside]).max()) if outside.any() else 0.0
    sup_R2 = float(np.abs(R2).max())
    if sup_outside > support_tol:
        raise AssertionError(
            f"R2 mass outside the regularization intervals: {sup_outside:.3e} > {support_tol:g}")
    if sup_R2 > 2.0 + sup_tol:
        raise AssertionError(f"sup |R2| = {sup_R2:.6f} exceeds 2")

    # L1 via per-event quadrature of |2 H - 2 G| over [0, knot] x R
    nodes, weights = leggauss(l1_quad_points)
    sigma = 0.5 * knot * (nodes + 1.0)
    w = 0.5 * knot * weights
    rad = truncation_radius(knot / eps**2)
    offs = np.arange(-rad, rad + 1)
    g_knot = ev.g_many(offs, knot / eps**2)
    per_sigma = np.empty(sigma.size)
    for i, s in enumerate(sigma):
        h = (s / knot) * g_knot
        g = ev.g_many(offs, s / eps**2)
        per_sigma[i] = eps * float(np.abs(2.0 * h - 2.0 * g).sum())
    n_events = int(np.sum(emb.tau_events <= emb.tau_grid[-1]))
    l1 = n_events * float(np.dot(w, per_sigma))
    fitted_C = l1 / eps if eps > 0 else math.inf

    # Lebesgue norms of R1 over the full window per tau (events seen so far)
    r1_l1 = np.empty(emb.tau_grid.size)
    r1_g2 = np.empty(emb.tau_grid.size)
    if run is not None:
        js_full = run.initial.j_lo + np.arange(run.initial.u.size)
    else:
        js_full = emb.js
    for i, tau in enumerate(emb.tau_grid):
        vals = _r1_at(tau, emb.tau_events, emb.k_events, js_full, eps, d_star, ev)
        r1_l1[i] = eps * float(np.abs(vals).sum())
        r1_g2[i] = float(np.sum(np.diff(vals) ** 2) / eps)

    # interface condition Q + R1 = 1 at the exact event points
    iface = np.empty(emb.tau_events.size)
    if run is not None and log is not None:
        p0 = run.initial.p()
        for n, (tk, ke) in enumerate(zip(emb.tau_events, emb.k_events)):
            t = tk / eps**2
            col = ke - run.initial.j_lo
            q_val = float(heat_convolution(p0, t, ev)[col])
            r1_val = float(_r1_at(tk, emb.tau_events, emb.k_events,
                                  np.array([ke]), eps, d_star, ev)[0])
            iface[n] = q_val + r1_val - 1.0
    else:
        iface = np.full(emb.tau_events.size, np.nan)

    return SplitFields(
        d_star=d_star, R1=R1, R2=R2, sup_R2=sup_R2, sup_R2_outside=sup_outside,
        l1_R2=l1, fitted_C_l1=fitted_C, r1_l1_per_tau=r1_l1,
        r1_grad_l2_per_tau=r1_g2, interface_condition=iface,
    )


def gap_statistics(logs: dict[float, TransitionLog], tau_fin: float) -> dict:
    """Scaled event-gap minima per eps and the fitted gap constant d_star.

    For each eps the statistic is min_k eps * (t*_{k+1} - t*_k); the fitted
    d_star is half the smallest statistic over the sweep.  Sweeps without at
    least two events contribute nothing (vacuous pass).
    """
    per_eps = {}
    for eps, log in sorted(logs.items()):
        ts = log.times
        K = len(ts)
        entry = {"K": K, "K_times_eps": K * eps, "min_scaled_gap": None}
        if K >= 2:
            entry["min_scaled_gap"] = float(eps * np.diff(ts).min())
        per_eps[eps] = entry
    gaps = [e["min_scaled_gap"] for e in per_eps.values() if e["min_scaled_gap"]]
    d_star = 0.5 * min(gaps) if gaps else None
    report = {
        "per_eps": per_eps,
        "d_star_fitted": d_star,
        "gap_variation_factor": (max(gaps) / min(gaps)) if gaps else None,
        "K_bound_ok": True,
    }
    if d_star:
        for eps, entry in per_eps.items():
            if entry["K"] and entry["K"] > tau_fin / (2.0 * d_star * eps) + 1.0:
                report["K_bound_ok"] = False
    return report


def regular_part_bounds(run: SingleInterfaceRun, info: MacroInitialData,
                        ev: KernelEvaluator | None = None,
                        times: np.ndarray | None = None) -> dict:
    """Check |grad+ q| <= alpha*eps and |dq/dt| <= alpha*eps^2 + beta*eps*g_0(t).

    Returns the worst slack per bound (negative slack means the bound holds).
    """
    ev = ev or KernelEvaluator()
    eps, alpha, beta = info.eps, info.alpha, info.beta
    if times is None:
        times = np.linspace(run.initial.t, run.final.t, 9)[1:]
    # pad by two sites so gradient/laplacian are interior on the window
    js_pad = np.arange(info.j_lo - 2, info.j_hi + 3)
    p0_pad = info.p0_at(js_pad)
    worst_grad = -math.inf
    worst_dot = -math.inf
    for t in times:
        q = heat_convolution(p0_pad, float(t), ev)
        grad = np.abs(np.diff(q)[1:-1])
        lap = np.abs(q[2:] - 2.0 * q[1:-1] + q[:-2])
        g0 = ev.g(0, float(t))
        worst_grad = max(worst_grad, float(grad.max()) - alpha * eps)
        worst_dot = max(worst_dot, float(lap.max()) - (alpha * eps**2 + beta * eps * g0))
    return {"grad_slack": worst_grad, "qdot_slack": worst_dot,
            "alpha": alpha, "beta": beta, "eps": eps}


def _pair_quotients(field2d: np.ndarray, tau_grid: np.ndarray, eps: float,
                    gamma_t: float, gamma_x: float, stride: int = 7) -> tuple[float, float]:
    """Empirical Hoelder quotients in time (columns) and space (rows)."""
    qt = 0.0
    n_tau = tau_grid.size
    for k in (1, stride, max(1, n_tau // 3)):
        if k >= n_tau:
            continue
        dt = tau_grid[k:] - tau_grid[:-k]
        dv = np.abs(field2d[k:] - field2d[:-k]).max(axis=1)
        ok = dt > 0
        if ok.any():
            qt = max(qt, float((dv[ok] / dt[ok] ** gamma_t).max()))
    qx = 0.0
    for k in (1, 3, 11):
        if k >= field2d.shape[1]:
            continue
        dxi = k * eps
        dv = np.abs(field2d[:, k:] - field2d[:, :-k]).max()
        qx = max(qx, float(dv / dxi**gamma_x))
    return qt, qx


def holder_diagnostics(emb: Embedding, split: SplitFields,
                       gammas=(0.25, 0.4, 0.49)) -> dict:
    """Empirical Hoelder/Lipschitz/Lebesgue diagnostics for one sweep member."""
    out = {"eps": emb.eps}
    qt, qx = _pair_quotients(emb.Q, emb.tau_grid, emb.eps, 0.5, 1.0)
    out["Q_quotient_tau_half"] = qt
    out["Q_quotient_xi_one"] = qx
    for gamma in gammas:
        qt, qx = _pair_quotients(split.R1, emb.tau_grid, emb.eps, gamma, 0.5)
        out[f"R1_quotient_tau_{gamma}"] = qt
    out["R1_quotient_xi_half"] = qx
    if emb.tau_events.size >= 2:
        gaps = np.diff(emb.tau_events)
        out["xi_star_lipschitz"] = float(emb.eps / gaps.min())
    else:
        out["xi_star_lipschitz"] = 0.0
    out["sup_R1_l1"] = float(split.r1_l1_per_tau.max())
    out["sup_R1_grad_l2"] = float(np.sqrt(split.r1_grad_l2_per_tau.max()))
    return out


def compare_to_limit(embeddings: dict[float, Embedding], splits: dict[float, "SplitFields"],
                     macro) -> dict:
    """Distances of each sweep member to the reference limit solve.

    e(eps) = sup_tau |xi*_eps - xi*| plus the sup distance of Q + R1 to P on
    the embedding grid.
    """
    report = {"per_eps": {}}
    for eps in sorted(embeddings, reverse=True):
        emb = embeddings[eps]
        xi_limit = macro.xi_star_at(emb.tau_grid)
        e_xi = float(np.abs(emb.xi_star - xi_limit).max())
        approx = emb.Q + splits[eps].R1
        worst_field = 0.0
        for i, tau in enumerate(emb.tau_grid):
            P_limit = macro.interp_P(float(tau), emb.xi)
            worst_field = max(worst_field, float(np.abs(approx[i] - P_limit).max()))
        report["per_eps"][eps] = {"e_xi": e_xi, "e_field": worst_field}
    eps_sorted = sorted(report["per_eps"], reverse=True)
    report["e_xi_series"] = [report["per_eps"][e]["e_xi"] for e in eps_sorted]
    report["e_field_series"] = [report["per_eps"][e]["e_field"] for e in eps_sorted]
    report["eps_series"] = eps_sorted
    return report
