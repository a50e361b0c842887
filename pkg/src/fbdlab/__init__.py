"""Numerical laboratory for bistable lattice diffusion and its free-boundary limit."""

from .potentials import Potential, piecewise_quadratic, smooth_demo, custom_potential
from .lattice import (LatticeState, BoundaryCondition, neumann, dirichlet, window,
                      discrete_laplacian, rhs, energy, dissipation, metric_potential,
                      comparison_bounds, entropy_production)
from .integrator import EulerConfig, Trajectory, euler_step, run, stability_dt
from .kernel import (KernelEvaluator, KernelBoundReport, G_eps, H_eps,
                     verify_monotonicity, verify_decay, verify_holder)
from .single_interface import (SingleInterfaceState, TransitionLog, TransitionEvent,
                               check_membership, linear_rhs, advance_to_next_transition,
                               run_single_interface, decompose, inter_event_integrator)
from .initial_data import (MacroProfile, MacroInitialData, moving_profile,
                           standing_profile, build_initial_data)
from .macro_limit import (MacroSolution, solve_fbp, stefan_residual,
                          hilpert_contraction, distributional_residual)
from .scaling import (Embedding, SplitFields, build_embeddings, split_R,
                      gap_statistics, regular_part_bounds, holder_diagnostics,
                      compare_to_limit)
from .experiments import run_preset, PRESET_NAMES

__version__ = "0.1.0"
