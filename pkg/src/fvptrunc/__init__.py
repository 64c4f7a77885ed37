"""Spectral-truncation regularization for a backward parabolic problem
with a nonlinear source and a future-time memory term."""

from .bounds import (BoundInputs, DominanceReport, DominanceSample, check_dominance,
                     gronwall_bound, gronwall_comparison_solution, log_noise_bound,
                     log_total_bound, log_truncation_bound, noise_bound, total_bound,
                     truncation_bound)
from .errors import (BracketError, ConfigError, ExponentOverflowError, FvptruncError,
                     NoiseTooLargeError, NonConvergenceError, ReferenceRejectedError,
                     UnsupportedDomainError, UnsupportedRegimeError)
from .grids import TimeGrid, Trajectory
from .harness import (ExperimentConfig, ExperimentReport, ExperimentRow, RateFit,
                      StaircaseResult, add_noise, fit_rate, holder_bound_staircase,
                      illposed_table, run_experiment)
from .param_choice import (HOLDER_RULE, LOG_RULE, ChoiceInputs, LevelChoice,
                           ZetaInverse, choose_level, choose_n_holder, choose_n_log,
                           zeta, zeta_inverse)
from .problem import FvpInstance, SourceFunction
from .quadrature import backward_cumulative, exp_kernel_profile
from .reference import (IllposedPair, LinearModeRoots, ReferenceSolution,
                        closed_form_solution, combined_closed_form, illposed_pair,
                        mode_coefficient, mode_roots, self_convergent_reference)
from .solver import (PicardResult, SolverConfig, apply_spectral_growth,
                     apriori_contraction_iteration, exp_kernel_integral,
                     fixed_point_defect, fixed_point_map, picard_solve)
from .spectral import (EigenModel, GevreyParams, SpectralField, evaluate_on_grid,
                       gevrey_norm, l2_norm)

__version__ = "0.1.0"

__all__ = [
    "BoundInputs", "BracketError", "ChoiceInputs", "ConfigError", "DominanceReport",
    "DominanceSample", "EigenModel", "ExperimentConfig", "ExperimentReport",
    "ExperimentRow", "ExponentOverflowError", "FvpInstance", "FvptruncError",
    "GevreyParams", "HOLDER_RULE", "IllposedPair", "LOG_RULE", "LevelChoice",
    "LinearModeRoots", "NoiseTooLargeError", "NonConvergenceError", "PicardResult",
    "RateFit", "ReferenceRejectedError", "ReferenceSolution", "SolverConfig",
    "SourceFunction", "SpectralField", "StaircaseResult", "TimeGrid", "Trajectory",
    "UnsupportedDomainError", "UnsupportedRegimeError", "ZetaInverse", "add_noise",
    "apply_spectral_growth", "apriori_contraction_iteration", "backward_cumulative",
    "check_dominance", "choose_level", "choose_n_holder", "choose_n_log",
    "closed_form_solution", "combined_closed_form", "evaluate_on_grid",
    "exp_kernel_integral", "exp_kernel_profile", "fit_rate", "fixed_point_defect",
    "fixed_point_map", "gevrey_norm", "gronwall_bound",
    "gronwall_comparison_solution", "holder_bound_staircase", "illposed_pair",
    "illposed_table", "l2_norm", "log_noise_bound", "log_total_bound",
    "log_truncation_bound", "mode_coefficient", "mode_roots", "noise_bound",
    "picard_solve", "run_experiment", "self_convergent_reference", "total_bound",
    "truncation_bound", "zeta", "zeta_inverse",
]
