"""Stationary distributions of block-structured Markov chains.

Block-form GTH elimination, prefix censoring, RG-factorization, and finite
approximations of M/G/1-type chains by renormalised censored columns.
"""
from .blocklinalg import (BlockMatrix, LevelPhaseIndex, MatrixFileError, NotStochasticError,
                          SingularPivotError, StationaryVector, block_get, partition,
                          read_matrix, row_defect, write_matrix)
from .censor import censor_prefix
from .gth import forward_eliminate, solve
from .mg1 import MG1Spec, error_bound, g_columns, stop_depth
from .augment import l1_truncation_error, natural_lbca, racm
from .models import MxM1WvParams, build_spec
from .rgfact import factorize, solve_by_factors

__all__ = [
    "BlockMatrix", "LevelPhaseIndex", "MatrixFileError", "NotStochasticError",
    "SingularPivotError", "StationaryVector", "block_get", "partition", "read_matrix",
    "row_defect", "write_matrix", "censor_prefix", "forward_eliminate", "solve",
    "MG1Spec", "error_bound", "g_columns", "stop_depth", "l1_truncation_error",
    "natural_lbca", "racm", "MxM1WvParams", "build_spec", "factorize", "solve_by_factors",
]
