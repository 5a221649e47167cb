"""Weighted Hankel low-rank approximation of time series by a modified
Gauss-Newton iteration over GLRR vectors."""
from .core import (BoundaryIndexSet, GlrrError, GlrrVector, TimeSeries, embed,
                   glrr_residual, insert_pivot, normalize_pivot, remove_pivot,
                   self_convolve)
from .poly import compensated_horner_eval, eval_on_grid, horner_eval
from .projection import ProjectionResult, project_onto_glrr, weighted_pinv_apply
from .solver import SolveReport, SolverConfig, initial_glrr_from_svd, mgn_direction, solve
from .subspace import DegenerateSubspaceError, SubspaceBasis, basis_Z, fhat
from .weights import (UnstableARError, WeightSpec, apply_mask, ar_precision,
                      from_factor, identity_weight)

__all__ = [
    "BoundaryIndexSet", "DegenerateSubspaceError", "GlrrError", "GlrrVector",
    "ProjectionResult", "SolveReport", "SolverConfig", "SubspaceBasis",
    "TimeSeries", "UnstableARError", "WeightSpec", "apply_mask", "ar_precision",
    "basis_Z", "compensated_horner_eval", "embed", "eval_on_grid", "fhat",
    "from_factor", "glrr_residual", "horner_eval", "identity_weight",
    "initial_glrr_from_svd", "insert_pivot", "mgn_direction", "normalize_pivot",
    "project_onto_glrr", "remove_pivot", "self_convolve", "solve",
    "weighted_pinv_apply",
]
