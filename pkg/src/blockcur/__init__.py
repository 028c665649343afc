"""Blockwise CUR low-rank approximation."""

from .cur import CurFactors, assemble, decompose, evaluate, pseudoinverse, relative_error
from .errors import (
    BudgetError,
    CurError,
    InvalidArgumentError,
    InvalidDimensionError,
    InvalidIndexError,
    InvalidPartitionError,
    InvalidRankError,
    InvalidShapeError,
    MatrixLoadError,
)
from .matrix import (
    Axis,
    BlockPartition,
    chebyshev_norm,
    frobenius_norm,
    gen_hilbert,
    gen_synthetic_lowrank,
    load_matrix,
    partition,
    store_matrix,
)
from .oracle import (
    BoundCheck,
    MaxvolResult,
    brute_force_maxvol,
    jacobi_svd,
    singular_values,
    verify_theorem1,
    verify_theorem2,
    volume,
)
from .selection import IndexSet, SelectionTrace, aca_sequential, blockwise_select

__version__ = "0.1.0"
