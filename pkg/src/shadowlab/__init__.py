"""Pseudo-orbit shadowing and attractor distance bounds for smooth maps."""
from .bounds import (ContinuityBound, HolderBound, attractor_continuity_bound, distance_bound,
                     holder_alpha, holder_exponent, lift_constant,
                     neighborhood_shadowing_constants, perturbation_defect, subsample_constants)
from .core import (AttractionProfile, Ball, Box, EquilibriumReport, FlowMap, SmoothMap,
                   birkhoff_number, exp_attraction_estimate, find_fixed_point,
                   hyperbolicity_check, linear_map, lipschitz_estimate, make_system, power_map,
                   region_invariance_check)
from .errors import ShadowlabError
from .experiment import ExperimentConfig, RunReport, run_experiment, sweep
from .solver import (ShadowingCertificate, SolverConstants, assemble_constants,
                     contraction_solve, linear_green_solve, shadow_pseudo_orbit,
                     verify_certificate)
from .splitting import (PseudoOrbit, SplittingFrame, build_splitting, choose_power,
                        verify_splitting)
from .subspace import (ObliqueProjector, Subspace, direct_sum_check, inclination, map_subspace,
                       oblique_projector, orthogonal_projector, projection_norm_bound,
                       projector_composition_norm, subspace_intersection)

__version__ = "0.1.0"
