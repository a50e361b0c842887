"""Deterministic figure rendering from serialized simulation artifacts.

Figures read only CSV/JSON files produced by the solver CLI; no solver code
is imported.  Styles are fixed and output files carry no timestamps, so
re-rendering identical inputs produces byte-identical images.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schemas import (SchemaError, read_convergence, read_energy,
                      read_interface, read_kernel_report, read_snapshots)

__all__ = ["FigureSpec", "render", "KINDS"]

KINDS = ("snapshots", "interface", "energy", "kernel-decay", "convergence")

_SAVE_OPTS = dict(dpi=110, metadata={"Software": None})


class FigureSpec:
    """Validated rendering request loaded from a JSON document."""

    def __init__(self, kind: str, inputs: dict, out: str, title: str = "",
                 overlays: dict | None = None, panels: int = 4):
        if kind not in KINDS:
            raise ValueError(f"unknown figure kind {kind!r}; choose from {KINDS}")
        self.kind = kind
        self.inputs = {k: Path(v) for k, v in inputs.items()}
        self.out = Path(out)
        self.title = title
        self.overlays = overlays or {}
        self.panels = panels

    @classmethod
    def from_json(cls, path) -> "FigureSpec":
        with open(path) as fh:
            doc = json.load(fh)
        return cls(kind=doc["kind"], inputs=doc["inputs"], out=doc["out"],
                   title=doc.get("title", ""), overlays=doc.get("overlays"),
                   panels=int(doc.get("panels", 4)))


def _phase_bands(ax, overlays):
    if "u_star" in overlays:
        lo, hi = overlays["u_star"]
        ax.axhspan(lo, hi, color="0.85", zorder=0)
    if "u_hash" in overlays:
        lo, hi = overlays["u_hash"]
        ax.axhspan(lo, hi, color="0.93", zorder=-1)


def _render_snapshots(spec: FigureSpec) -> list[Path]:
    frames = read_snapshots(spec.inputs["snapshots"])
    if not frames:
        raise SchemaError("snapshot file contains no frames")
    n = min(spec.panels, len(frames))
    picks = [frames[int(round(i * (len(frames) - 1) / max(n - 1, 1)))] for i in range(n)]
    iface = None
    if "interface" in spec.inputs:
        iface = read_interface(spec.inputs["interface"])
    fig, axes = plt.subplots(2, (n + 1) // 2, figsize=(3.2 * ((n + 1) // 2), 5.2),
                             sharex=True, sharey=True, squeeze=False)
    for ax, frame in zip(axes.ravel(), picks):
        ax.plot(frame["xi"], frame["u"], "k-", lw=0.9)
        _phase_bands(ax, spec.overlays)
        if iface is not None:
            tau_i, xi_i = iface
            pos = np.interp(frame["tau"], tau_i, xi_i)
            ax.axvline(pos, color="0.4", ls="--", lw=0.8)
        ax.set_title(f"tau = {frame['tau']:.3f}", fontsize=9)
    for ax in axes.ravel()[len(picks):]:
        ax.set_visible(False)
    for ax in axes[-1]:
        ax.set_xlabel(r"$\xi$")
    for row in axes:
        row[0].set_ylabel(r"$u$")
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    fig.savefig(spec.out, **_SAVE_OPTS)
    plt.close(fig)
    return [spec.out]


def _render_interface(spec: FigureSpec) -> list[Path]:
    tau, xi = read_interface(spec.inputs["interface"])
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.step(tau, xi, where="post", color="k", lw=1.0)
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel(r"$\xi^*$")
    if spec.title:
        ax.set_title(spec.title, fontsize=10)
    fig.tight_layout()
    fig.savefig(spec.out, **_SAVE_OPTS)
    plt.close(fig)
    return [spec.out]


def _render_energy(spec: FigureSpec) -> list[Path]:
    t, E = read_energy(spec.inputs["energy"])
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.plot(t, E, "k-", lw=1.0)
    ax.set_xlabel(r"$t$")
    ax.set_ylabel("energy")
    if spec.title:
        ax.set_title(spec.title, fontsize=10)
    fig.tight_layout()
    fig.savefig(spec.out, **_SAVE_OPTS)
    plt.close(fig)
    return [spec.out]


def _render_kernel_decay(spec: FigureSpec) -> list[Path]:
    report = read_kernel_report(spec.inputs["report"])
    consts = report["decay"]["constants"]
    t = np.logspace(-1, 4, 200)
    # reconstruct g0 from the shipped samples if present, else the envelope only
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.loglog(t, consts["C_g0"] * (1 + t) ** -0.5, "k--", lw=0.9,
              label=r"fitted $C(1+t)^{-1/2}$")
    ax.loglog(t, consts["c_g0"] * (1 + t) ** -0.5, "k:", lw=0.9,
              label=r"fitted $c(1+t)^{-1/2}$")
    if "g0_samples" in report:
        samples = np.asarray(report["g0_samples"])
        ax.loglog(samples[:, 0], samples[:, 1], "k.", ms=3, label=r"$g_0(t)$")
    ax.set_xlabel(r"$t$")
    ax.set_ylabel(r"$g_0$")
    ax.legend(fontsize=8, frameon=False)
    if spec.title:
        ax.set_title(spec.title, fontsize=10)
    fig.tight_layout()
    fig.savefig(spec.out, **_SAVE_OPTS)
    plt.close(fig)
    return [spec.out]


def _render_convergence(spec: FigureSpec) -> list[Path]:
    cols = read_convergence(spec.inputs["convergence"])
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.loglog(cols["eps"], cols["e_xi"], "ko-", lw=1.0, ms=4, label=r"$e_{\xi}(\epsilon)$")
    if "e_field" in cols:
        ax.loglog(cols["eps"], cols["e_field"], "ks--", lw=0.9, ms=4,
                  label=r"field distance")
    ref = cols["e_xi"][0] * cols["eps"] / cols["eps"][0]
    ax.loglog(cols["eps"], ref, "k:", lw=0.8, label=r"slope 1")
    ax.set_xlabel(r"$\epsilon$")
    ax.set_ylabel("distance to limit")
    ax.legend(fontsize=8, frameon=False)
    if spec.title:
        ax.set_title(spec.title, fontsize=10)
    fig.tight_layout()
    fig.savefig(spec.out, **_SAVE_OPTS)
    plt.close(fig)
    return [spec.out]


_RENDERERS = {
    "snapshots": _render_snapshots,
    "interface": _render_interface,
    "energy": _render_energy,
    "kernel-decay": _render_kernel_decay,
    "convergence": _render_convergence,
}


def render(spec: FigureSpec) -> list[Path]:
    """Render one figure spec; returns the written image paths."""
    spec.out.parent.mkdir(parents=True, exist_ok=True)
    return _RENDERERS[spec.kind](spec)
