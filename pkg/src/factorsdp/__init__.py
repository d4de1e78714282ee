"""Low-rank factored solvers for sparse semidefinite programs.

The package solves min f(Z) s.t. A(Z) = b with Z symmetric and either
positive semidefinite (convex relaxation, dense splitting baseline) or
factored as Z = X @ X.T with constrained factors (nonconvex ADMM,
pattern-sparse storage).  Problem builders cover graph cuts, community
detection, image segmentation, and partial-observation factorization;
randomized hyperplane rounding turns relaxed solutions into labels.
"""

from .admm_matrix import (LinearTrace, MatrixAdmmState, PartialObsLS,
                          solve as solve_factored)
from .admm_vector import (LinearForm, QuadraticForm, VectorAdmmState,
                          solve as solve_vector)
from .constraints import (Binary, Free, Nonnegative, UnitNormColumn,
                          UnitNormRow, generalized_project)
from .diagnostics import (auglag_matrix, auglag_vector, critical_penalty,
                          descent_check, linear_rate_fit, theory_constants)
from .fileio import (parse_graph, parse_observations, parse_ppm,
                     serialize_graph, serialize_observations,
                     write_result_record)
from .linmaps import diag_map, none_map, trace_map
from .problems import (ProblemInstance, build_community, build_maxcut,
                       build_partial_ls, build_segmentation, default_rank,
                       generate_sbm, random_graph,
                       random_partial_observations, relative_error)
from .results import SolveResult, SolverConfig, Trace
from .rounding import (cut_value, factor_from_eig, factor_from_svd,
                       hyperplane_round, sign_round)
from .sdr import DrsConfig, drs_step, prox_affine, prox_linear, prox_psd
from .sdr import solve as solve_relaxation
from .sparse import (ShiftedSymSparse, SparsityPattern, SymSparse,
                     operator_norm, power_iteration, project_pattern,
                     quad_form, row_inner, spectral_norm, sym_spmm)

__version__ = "0.1.0"

__all__ = [
    "Binary", "DrsConfig", "Free", "LinearForm", "LinearTrace",
    "MatrixAdmmState", "Nonnegative", "PartialObsLS", "ProblemInstance",
    "QuadraticForm", "ShiftedSymSparse", "SolveResult", "SolverConfig",
    "SparsityPattern", "SymSparse", "Trace", "UnitNormColumn", "UnitNormRow",
    "VectorAdmmState", "auglag_matrix", "auglag_vector", "build_community",
    "build_maxcut", "build_partial_ls", "build_segmentation",
    "critical_penalty", "cut_value", "default_rank", "descent_check",
    "diag_map", "drs_step", "factor_from_eig", "factor_from_svd",
    "generalized_project", "generate_sbm", "hyperplane_round",
    "linear_rate_fit", "none_map", "operator_norm", "parse_graph",
    "parse_observations", "parse_ppm", "power_iteration", "project_pattern",
    "prox_affine", "prox_linear", "prox_psd", "quad_form", "random_graph",
    "random_partial_observations", "relative_error", "row_inner",
    "serialize_graph", "serialize_observations", "sign_round",
    "solve_factored", "solve_relaxation", "solve_vector", "spectral_norm",
    "sym_spmm", "theory_constants", "trace_map", "write_result_record",
]
