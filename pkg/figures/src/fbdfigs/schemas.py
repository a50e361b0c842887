"""CSV schema readers for the simulation artifacts.

Each reader checks the header against the expected column names and raises
SchemaError naming the offending column, so a renderer never draws from a
misread file.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

__all__ = ["SchemaError", "read_table", "read_snapshots", "read_interface",
           "read_energy", "read_convergence", "read_kernel_report"]


class SchemaError(ValueError):
    pass


def read_table(path, expected: list[str]) -> dict[str, np.ndarray]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file missing: {path}")
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for col in expected:
            if col not in header:
                raise SchemaError(f"{path.name}: missing column {col!r} (found {header})")
        body = fh.read()
    if not body.strip():
        raise SchemaError(f"{path.name}: no data rows")
    data = np.loadtxt(body.splitlines(), delimiter=",", ndmin=2)
    if data.shape[1] != len(header):
        raise SchemaError(f"{path.name}: row width {data.shape[1]} != header width {len(header)}")
    return {name: data[:, i] for i, name in enumerate(header)}


def read_snapshots(path):
    cols = read_table(path, ["tau", "xi", "u", "p"])
    taus = np.unique(cols["tau"])
    frames = []
    for tau in taus:
        sel = cols["tau"] == tau
        order = np.argsort(cols["xi"][sel])
        frames.append({
            "tau": float(tau),
            "xi": cols["xi"][sel][order],
            "u": cols["u"][sel][order],
            "p": cols["p"][sel][order],
        })
    return frames


def read_interface(path):
    cols = read_table(path, ["tau", "xi_star"])
    order = np.argsort(cols["tau"])
    return cols["tau"][order], cols["xi_star"][order]


def read_energy(path):
    cols = read_table(path, ["t", "E"])
    return cols["t"], cols["E"]


def read_convergence(path):
    cols = read_table(path, ["eps", "e_xi"])
    order = np.argsort(cols["eps"])[::-1]
    out = {k: v[order] for k, v in cols.items()}
    return out


def read_kernel_report(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file missing: {path}")
    with open(path) as fh:
        report = json.load(fh)
    if "decay" not in report or "constants" not in report["decay"]:
        raise SchemaError(f"{path.name}: missing decay constants section")
    return report
