#!/usr/bin/env python3
"""Regenerate the shipped sample artifacts under figures/sample_data/.

Runs the solver package at desk scale (reduced N and coarse grids) so the
committed CSV/JSON files stay small; schemas are identical to full runs.
"""

import json
import sys
from pathlib import Path

import numpy as np

from fbdlab import io_utils
from fbdlab.cli import main as fbd_main
from fbdlab.experiments import interface_positions, run_preset

HERE = Path(__file__).resolve().parent
OUT = HERE.parent / "sample_data"


def preset_sample(name: str, n_sites: int, n_snapshots: int = 10) -> None:
    res = run_preset(name, N=n_sites, n_snapshots=n_snapshots)
    eps, pot = res.eps, res.pot
    out = OUT / name
    rows = []
    for t, u in res.traj.snapshots:
        p = pot.dphi(u)
        n_half = (u.size - 1) // 2
        for j, (uj, pj) in enumerate(zip(u, p)):
            rows.append((eps * eps * t, eps * (j - n_half), uj, pj))
    io_utils.write_csv(out / "snapshots.csv", ["tau", "xi", "u", "p"], rows)
    iface = []
    for t, u in res.traj.snapshots:
        pos = interface_positions(u, pot, eps)
        if pos:
            iface.append((eps * eps * t, pos[0]))
    io_utils.write_csv(out / "interface.csv", ["tau", "xi_star"], iface)
    energy_rows = res.traj.energies[:: max(1, len(res.traj.energies) // 400)]
    io_utils.write_csv(out / "energy.csv", ["t", "E"], energy_rows)
    io_utils.write_json(out / "checks.json", res.checks)
    print(f"{name}: {len(rows)} snapshot rows, checks pass = {res.passed}")


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    preset_sample("annihilation", 100)
    preset_sample("pinning", 120)
    preset_sample("depinning", 120)
    fbd_main(["kernel", "--verify", "all", "--t-max", "1000",
              "--out", str(OUT / "kernel_report.json")])
    cfg = {
        "eps_list": [0.1, 0.05, 0.02],
        "initial_data": {"profile": {"kind": "moving"}},
        "grids": {"tau_fin": 0.1, "dxi": 4e-3, "n_tau": 41, "xi_span": 0.8,
                  "n_record": 81, "domain": [-4.0, 4.0]},
    }
    cfg_path = OUT / "compare_config.json"
    cfg_path.write_text(json.dumps(cfg, indent=2) + "\n")
    fbd_main(["compare", "--config", str(cfg_path), "--out", str(OUT / "compare")])
    return 0


if __name__ == "__main__":
    sys.exit(main())
