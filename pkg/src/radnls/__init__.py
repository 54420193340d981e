"""radnls: a numerical laboratory for the radial NLS with potential.

Builds the ground-state branch bifurcating from the linear bound state,
evolves small solutions, splits them into a branch component plus
radiation, and measures dispersive decay rates of the radiation and of
the linearized propagator.
"""
from .decay import CaseClassification, DecayTrace, ExponentFit, classify, fit_exponent
from .evolution import AbsorberSpec, EvolutionConfig, TrajectoryFrame, energy, evolve
from .grid import (GridSpec, RadialField, apply_laplacian, inner_product,
                   lp_norm, weighted_l2_norm)
from .hamiltonian import (PotentialSpec, SpectralData, probe_linear_decay,
                          project_continuous, propagate_linear,
                          solve_ground_eigenpair)
from .kernels import BACKEND
from .manifold import BoundStateBranch, continue_branch
from .modulation import (AsymptoticReport, ModulationTrace, analyze_run,
                         asymptotic_report, decompose, gauge_removed_a,
                         modulation_rhs, radiation_residual)
from .nonlinearity import NonlinearitySpec, alpha_bounds, check_h2_prime, dg_apply, f2_apply
from .propagator import (LinearizationPath, omega_apply, probe_decay,
                         probe_t_short_time, standard_probe_plan,
                         t_operator_apply, t_tilde_apply)

__version__ = "0.1.0"
