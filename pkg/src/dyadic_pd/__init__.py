"""Pairwise-differences least squares for directed dyadic data with two-way fixed effects."""

from .core import DyadicDataset, LatentTruth, combinations4, common_count, pairs_with_q_common, permutations
from .designs import Design, cond_mean_spec
from .errors import (
    DegenerateHessian,
    DegenerateSize,
    DegenerateVariance,
    DyadicError,
    IngestError,
    OracleInputError,
)
from .estimator import FitResult, Path, fit, hessian_naive, hessian_reduced, residual_matrix
from .simulate import McConfig, McResult, McTableRow, derive, generate, run_mc
from .variance import AvarResult, avar_and_tstats, estimate_avar

__all__ = [
    "AvarResult",
    "DegenerateHessian",
    "DegenerateSize",
    "DegenerateVariance",
    "Design",
    "DyadicDataset",
    "DyadicError",
    "FitResult",
    "IngestError",
    "LatentTruth",
    "McConfig",
    "McResult",
    "McTableRow",
    "OracleInputError",
    "Path",
    "avar_and_tstats",
    "combinations4",
    "common_count",
    "cond_mean_spec",
    "derive",
    "estimate_avar",
    "fit",
    "generate",
    "hessian_naive",
    "hessian_reduced",
    "pairs_with_q_common",
    "permutations",
    "residual_matrix",
    "run_mc",
]

__version__ = "0.1.0"
