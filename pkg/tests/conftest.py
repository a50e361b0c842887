"""Shared fixtures: heavy runs are computed once per session."""

import numpy as np
import pytest

from fbdlab.initial_data import build_initial_data, moving_profile, window_margin_sites
from fbdlab.kernel import KernelEvaluator
from fbdlab.macro_limit import solve_fbp
from fbdlab.scaling import build_embeddings, gap_statistics, split_R
from fbdlab.single_interface import SingleInterfaceState, run_single_interface

SWEEP_EPS = (0.1, 0.05, 0.02, 0.01)
TAU_FIN = 0.2


@pytest.fixture(scope="session")
def ev():
    return KernelEvaluator()


@pytest.fixture(scope="session")
def ev_fourier():
    return KernelEvaluator(method="fourier-quadrature")


def random_x1_dataset(rng, margin=90, core=30):
    """Driven random single-interface data: flat plateaus near the walls."""
    lp = rng.uniform(3.2, 4.2)
    rp = rng.uniform(-0.8, -0.2)
    u = np.concatenate([
        np.full(margin, lp),
        np.clip(lp + rng.normal(0.0, 0.25, size=core), 2.1, 5.0),
        np.clip(rp + rng.normal(0.0, 0.25, size=core), -1.9, -0.05),
        np.full(margin, rp),
    ])
    return u, margin + core


@pytest.fixture(scope="session")
def reference_run(ev):
    """Event-driven reference run used by the decomposition and Euler cross-checks."""
    rng = np.random.default_rng(42)
    u0, k = random_x1_dataset(rng, margin=140, core=30)
    state = SingleInterfaceState.from_initial(u0, k)
    run, log = run_single_interface(state, horizon=50.0)
    return state, run, log


@pytest.fixture(scope="session")
def sweep_results(ev):
    """eps sweep of the well-prepared moving preset: runs, logs, infos."""
    profile = moving_profile()
    out = {}
    for eps in SWEEP_EPS:
        state, info = build_initial_data(profile, eps, TAU_FIN)
        run, log = run_single_interface(state, TAU_FIN / eps**2)
        out[eps] = (run, log, info)
    return profile, out


@pytest.fixture(scope="session")
def sweep_gap_report(sweep_results):
    _, results = sweep_results
    logs = {eps: log for eps, (_, log, _) in results.items()}
    return gap_statistics(logs, TAU_FIN)


@pytest.fixture(scope="session")
def sweep_embeddings(sweep_results, sweep_gap_report, ev):
    """Embeddings and R-splits on a common macroscopic grid."""
    _, results = sweep_results
    d_star = 0.9 * sweep_gap_report["d_star_fitted"]
    embeddings, splits = {}, {}
    for eps, (run, log, info) in results.items():
        tau_grid = np.linspace(0.0, TAU_FIN, 81)
        js = np.arange(-int(1.2 / eps), int(1.2 / eps) + 1)
        emb = build_embeddings(run, log, eps, tau_grid, js, ev=ev, info=info)
        embeddings[eps] = emb
        splits[eps] = split_R(emb, d_star, ev=ev, run=run, log=log)
    return embeddings, splits, d_star


@pytest.fixture(scope="session")
def limit_reference(sweep_results):
    """High-resolution limit solve matching the sweep preset."""
    profile, _ = sweep_results
    return solve_fbp(profile.P, 0.0, TAU_FIN, 1e-3, (-4.0, 4.0), n_record=201)


@pytest.fixture(scope="session")
def preset_results():
    """All qualitative presets, run once."""
    from fbdlab.experiments import PRESET_NAMES, run_preset
    return {name: run_preset(name) for name in PRESET_NAMES}
