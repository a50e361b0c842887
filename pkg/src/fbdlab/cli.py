"""Command line interface.

Subcommands: simulate (general potential Euler run), single-interface
(event-driven piecewise-quadratic solver), kernel (verification report),
limit (free-boundary reference solve), sweep (eps sweep with diagnostics),
compare (sweep vs limit), preset (named qualitative experiments).  All
commands read a single JSON config document and write CSV/JSON artifacts
plus a metadata file into the output directory.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io_utils
from .initial_data import build_initial_data, moving_profile, standing_profile
from .integrator import EulerConfig, run as euler_run, stability_dt
from .kernel import (KernelEvaluator, verify_decay, verify_holder,
                     verify_monotonicity)
from .lattice import LatticeState, dirichlet, neumann, window
from .macro_limit import distributional_residual, solve_fbp, stefan_residual
from .potentials import piecewise_quadratic, smooth_demo
from .experiments import PRESET_NAMES, run_preset
from .scaling import (build_embeddings, compare_to_limit, gap_statistics,
                      holder_diagnostics, split_R)
from .single_interface import SingleInterfaceState, decompose, run_single_interface
from .initial_data import window_margin_sites


def _load_config(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _out_dir(args, cfg: dict) -> Path:
    """--out wins; otherwise the config's output.dir section."""
    if getattr(args, "out", None):
        return Path(args.out)
    out = cfg.get("output", {}).get("dir")
    if not out:
        raise SystemExit("no output directory: pass --out or set output.dir in the config")
    return Path(out)


def _potential_from(cfg: dict):
    kind = cfg.get("potential", {}).get("kind", "piecewise-quadratic")
    if kind == "piecewise-quadratic":
        return piecewise_quadratic()
    if kind == "smooth-demo":
        return smooth_demo()
    raise SystemExit(f"unknown potential kind {kind!r}")


def _bc_from(cfg: dict):
    spec = cfg.get("initial_data", {}).get("bc", "neumann")
    if spec == "neumann":
        return neumann()
    if spec == "window":
        return window()
    if isinstance(spec, dict) and spec.get("kind") == "dirichlet":
        return dirichlet(spec["c1"], spec["c2"])
    raise SystemExit(f"unknown boundary condition {spec!r}")


def _profile_from(cfg: dict):
    spec = cfg.get("initial_data", {}).get("profile", {"kind": "moving"})
    kind = spec.get("kind", "moving")
    params = {k: v for k, v in spec.items() if k != "kind"}
    if kind == "moving":
        return moving_profile(**params)
    if kind == "standing":
        return standing_profile(**params)
    raise SystemExit(f"unknown profile kind {kind!r}")


def cmd_kernel(args) -> int:
    ev = KernelEvaluator()
    t_max = args.t_max
    t_grid = np.concatenate([[0.1, 0.5], np.logspace(0, np.log10(t_max), 25)])
    report = {}
    if args.verify in ("all", "monotonicity"):
        report["monotonicity"] = verify_monotonicity(ev, np.linspace(0.0, 100.0, 201))
    if args.verify in ("all", "decay"):
        report["decay"] = verify_decay(ev, t_grid, j_range=100).as_dict()
    if args.verify in ("all", "holder"):
        t_pairs = [(t, t * f) for t in t_grid[t_grid > 0] for f in (1.5, 4.0)]
        j_pairs = [(0, 1), (0, 5), (3, 20), (-10, 10)]
        report["holder"] = verify_holder(ev, t_pairs, j_pairs)
    worst = max(
        v.get("max_violation", 0.0) if isinstance(v, dict) else 0.0
        for v in report.values()
    )
    report["worst_violation"] = worst
    sample_t = np.logspace(-1, np.log10(t_max), 33)
    report["g0_samples"] = [[float(t), ev.g(0, float(t))] for t in sample_t]
    io_utils.write_json(args.out, report)
    print(f"kernel verification: worst violation {worst:.3e} -> {args.out}")
    return 0 if worst <= 0.0 else 1


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args, cfg)
    pot = _potential_from(cfg)
    icfg = cfg.get("integrator", {})
    data = cfg.get("initial_data", {})
    eps = float(cfg.get("eps", data.get("eps", 0.02)))
    seed = cfg.get("seed")
    if "values" in data:
        u0 = np.asarray(data["values"], dtype=float)
    else:
        raise SystemExit("simulate requires initial_data.values")
    state = LatticeState(0.0, u0, _bc_from(cfg))
    t_end = float(icfg.get("t_end", 1.0))
    dt0 = float(icfg.get("dt0", stability_dt(pot, (u0.min() - 0.5, u0.max() + 0.5))))
    snaps = icfg.get("snapshot_times") or list(np.linspace(0, t_end, 11)[1:])
    run_cfg = EulerConfig(dt0=dt0, t_end=t_end,
                          dt_min=float(icfg.get("dt_min", 1e-12)),
                          energy_guard=bool(icfg.get("energy_guard", True)),
                          safety=float(icfg.get("safety", 0.5)),
                          snapshot_times=tuple(snaps))
    traj = euler_run(state, pot, run_cfg, eps)
    rows = []
    for t, u in traj.snapshots:
        p = pot.dphi(u)
        tau = eps * eps * t
        n_half = (u.size - 1) // 2
        for j, (uj, pj) in enumerate(zip(u, p)):
            rows.append((tau, eps * (j - n_half), uj, pj))
    io_utils.write_csv(out / "snapshots.csv", ["tau", "xi", "u", "p"], rows)
    io_utils.write_csv(out / "energy.csv", ["t", "E"], traj.energies)
    io_utils.write_csv(out / "dissipation.csv", ["t", "D"], traj.dissipations)
    io_utils.write_metadata(out, cfg, seed=seed, extra={"dt0": dt0})
    print(f"simulate: {len(traj.snapshots)} snapshots -> {out}")
    return 0


def cmd_single_interface(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args, cfg)
    data = cfg.get("initial_data", {})
    eps = float(cfg.get("eps", 1.0))
    horizon = float(cfg.get("integrator", {}).get("t_end", 50.0))
    if "values" in data:
        u0 = np.asarray(data["values"], dtype=float)
        k = int(data["k"])
        j_lo = int(data.get("j_lo", 0))
        state = SingleInterfaceState.from_initial(u0, k, j_lo=j_lo)
        info = None
    else:
        profile = _profile_from(cfg)
        state, info = build_initial_data(profile, eps, eps * eps * horizon)
    snaps = cfg.get("grids", {}).get("snapshot_times") or list(np.linspace(0, horizon, 11)[1:])
    run_, log = run_single_interface(state, horizon, snapshot_times=snaps)
    io_utils.write_csv(out / "events.csv", ["k", "t_star", "u_left", "jump"],
                       [(e.k, e.t_star, e.u_left, e.jump) for e in log.events])
    rows = []
    for t, u, kloc in run_.snapshots:
        s = np.full(u.size, -1.0)
        s[:kloc] = 1.0
        p = u - s
        for i, (uj, pj) in enumerate(zip(u, p)):
            rows.append((eps * eps * t, eps * (state.j_lo + i), uj, pj))
    io_utils.write_csv(out / "snapshots.csv", ["tau", "xi", "u", "p"], rows)
    margin = window_margin_sites(horizon) if info is not None else 0
    dec = decompose(run_, log, ev=KernelEvaluator(), interior_margin=margin)
    io_utils.write_csv(out / "decomposition_residuals.csv", ["t", "residual"],
                       dec.residuals)
    io_utils.write_metadata(out, cfg, seed=cfg.get("seed"),
                            extra={"n_events": len(log.events), "D": state.D})
    print(f"single-interface: {len(log.events)} events, "
          f"max residual {dec.max_residual:.3e} -> {out}")
    return 0


def cmd_limit(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args, cfg)
    grids = cfg.get("grids", {})
    profile = _profile_from(cfg)
    dxi = float(grids.get("dxi", 2e-3))
    domain = tuple(grids.get("domain", (-4.0, 4.0)))
    tau_end = float(grids.get("tau_end", 0.2))
    sol = solve_fbp(profile.P, float(grids.get("xi0", 0.0)), tau_end, dxi, domain,
                    cfl=float(grids.get("cfl", 0.45)),
                    n_record=int(grids.get("n_record", 201)))
    rows = []
    for i, tau in enumerate(sol.tau_record):
        for xi, P, mu in zip(sol.xi_centers, sol.P_rows[i], sol.mu_rows[i]):
            rows.append((tau, xi, P, mu))
    io_utils.write_csv(out / "p_field.csv", ["tau", "xi", "P", "mu"], rows)
    io_utils.write_csv(out / "xi_star.csv", ["tau", "xi_star"],
                       list(zip(sol.tau_record, sol.xi_star_at(sol.tau_record))))
    taus, resid = stefan_residual(sol)
    io_utils.write_csv(out / "residuals.csv", ["tau", "stefan_residual"],
                       [(t, r) for t, r in zip(taus, resid) if np.isfinite(r)])
    io_utils.write_json(out / "distributional_residual.json",
                        {"max_residual": distributional_residual(sol)})
    io_utils.write_metadata(out, cfg)
    print(f"limit: {len(sol.tau_record)} rows -> {out}")
    return 0


def _run_sweep(cfg: dict):
    eps_list = cfg.get("eps_list", [0.1, 0.05, 0.02, 0.01])
    tau_fin = float(cfg.get("grids", {}).get("tau_fin", 0.2))
    profile = _profile_from(cfg)
    ev = KernelEvaluator()
    results = {}
    for eps in eps_list:
        state, info = build_initial_data(profile, eps, tau_fin)
        run_, log = run_single_interface(state, tau_fin / eps**2)
        results[eps] = (run_, log, info)
    return results, profile, tau_fin, ev


def cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args, cfg)
    results, profile, tau_fin, ev = _run_sweep(cfg)
    logs = {eps: log for eps, (run_, log, info) in results.items()}
    gaps = gap_statistics(logs, tau_fin)
    io_utils.write_json(out / "gap_statistics.json", gaps)
    grids = cfg.get("grids", {})
    n_tau = int(grids.get("n_tau", 81))
    xi_span = float(grids.get("xi_span", 1.2))
    d_star = 0.9 * (gaps["d_star_fitted"] or 0.1)
    for eps, (run_, log, info) in results.items():
        run_dir = out / f"eps_{eps:g}"
        io_utils.write_csv(run_dir / "events.csv", ["k", "t_star", "tau_star"],
                           [(e.k, e.t_star, eps * eps * e.t_star) for e in log.events])
        tau_grid = np.linspace(0.0, tau_fin, n_tau)
        js = np.arange(-int(xi_span / eps), int(xi_span / eps) + 1)
        emb = build_embeddings(run_, log, eps, tau_grid, js, ev=ev, info=info)
        io_utils.write_csv(run_dir / "interface.csv", ["tau", "xi_star"],
                           list(zip(emb.tau_grid, emb.xi_star)))
        split = split_R(emb, d_star, ev=ev, run=run_, log=log)
        diag = holder_diagnostics(emb, split)
        diag["sup_R2"] = split.sup_R2
        diag["l1_R2"] = split.l1_R2
        diag["interface_condition_worst"] = float(np.abs(split.interface_condition).max()) \
            if split.interface_condition.size else 0.0
        io_utils.write_json(run_dir / "diagnostics.json", diag)
    io_utils.write_metadata(out, cfg)
    print(f"sweep: eps {sorted(results)} -> {out}")
    return 0


def cmd_compare(args) -> int:
    cfg = _load_config(args.config)
    out = _out_dir(args, cfg)
    results, profile, tau_fin, ev = _run_sweep(cfg)
    grids = cfg.get("grids", {})
    dxi = float(grids.get("dxi", 1e-3))
    sol = solve_fbp(profile.P, 0.0, tau_fin, dxi, tuple(grids.get("domain", (-4.0, 4.0))),
                    n_record=int(grids.get("n_record", 201)))
    logs = {eps: log for eps, (r, log, i) in results.items()}
    gaps = gap_statistics(logs, tau_fin)
    d_star = 0.9 * (gaps["d_star_fitted"] or 0.1)
    embeddings, splits = {}, {}
    n_tau = int(grids.get("n_tau", 81))
    xi_span = float(grids.get("xi_span", 1.2))
    for eps, (run_, log, info) in results.items():
        tau_grid = np.linspace(0.0, tau_fin, n_tau)
        js = np.arange(-int(xi_span / eps), int(xi_span / eps) + 1)
        embeddings[eps] = build_embeddings(run_, log, eps, tau_grid, js, ev=ev, info=info)
        splits[eps] = split_R(embeddings[eps], d_star, ev=ev, run=run_, log=log)
    report = compare_to_limit(embeddings, splits, sol)
    report["gap_statistics"] = gaps
    io_utils.write_json(out / "comparison.json", report)
    rows = [(eps, report["per_eps"][eps]["e_xi"], report["per_eps"][eps]["e_field"])
            for eps in sorted(report["per_eps"], reverse=True)]
    io_utils.write_csv(out / "convergence.csv", ["eps", "e_xi", "e_field"], rows)
    io_utils.write_metadata(out, cfg)
    print(f"compare: {rows} -> {out}")
    return 0


def cmd_preset(args) -> int:
    res = run_preset(args.name, seed=args.seed)
    out = Path(args.out)
    eps, pot = res.eps, res.pot
    rows = []
    for t, u in res.traj.snapshots:
        p = pot.dphi(u)
        n_half = (u.size - 1) // 2
        tau = eps * eps * t
        for j, (uj, pj) in enumerate(zip(u, p)):
            rows.append((tau, eps * (j - n_half), uj, pj))
    io_utils.write_csv(out / "snapshots.csv", ["tau", "xi", "u", "p"], rows)
    io_utils.write_csv(out / "energy.csv", ["t", "E"], res.traj.energies)
    from .experiments import interface_positions
    iface_rows = []
    for t, u in res.traj.snapshots:
        for pos in interface_positions(u, pot, eps)[:1]:
            iface_rows.append((eps * eps * t, pos))
    io_utils.write_csv(out / "interface.csv", ["tau", "xi_star"], iface_rows)
    io_utils.write_json(out / "checks.json", res.checks)
    io_utils.write_metadata(out, {"preset": args.name, **res.meta}, seed=res.meta["seed"])
    status = "PASS" if res.passed else "FAIL"
    print(f"preset {args.name}: {status} {res.checks} -> {out}")
    return 0 if res.passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fbd",
                                     description="bistable lattice diffusion laboratory")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("kernel", help="verify the discrete heat kernel bounds")
    p.add_argument("--verify", default="all",
                   choices=["all", "monotonicity", "decay", "holder"])
    p.add_argument("--t-max", type=float, default=1e4)
    p.add_argument("--out", default="kernel_report.json")
    p.set_defaults(fn=cmd_kernel)

    p = sub.add_parser("simulate", help="Euler run with a general potential")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("single-interface", help="event-driven piecewise-quadratic solver")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_single_interface)

    p = sub.add_parser("limit", help="free-boundary reference solve")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_limit)

    p = sub.add_parser("sweep", help="eps sweep with embeddings and diagnostics")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("compare", help="sweep vs limit solve")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("preset", help="named qualitative experiment")
    p.add_argument("name", choices=list(PRESET_NAMES))
    p.add_argument("--seed", type=int, default=20240901)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_preset)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
