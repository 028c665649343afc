"""Index selection: sequential adaptive cross approximation and the blockwise
norm-greedy selection with orthogonal deflation.
"""

from __future__ import annotations

from concurrent.futures import Executor, ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InvalidArgumentError, InvalidRankError
from .matrix import Axis, as_axis, as_matrix, chebyshev_norm, partition

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class IndexSet:
    """Selected row or column indices, in selection order."""

    indices: tuple[int, ...]
    axis: Axis

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise InvalidArgumentError(f"duplicate indices in {self.indices}")

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __getitem__(self, k):
        return self.indices[k]

    def to_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)

    def truncated(self, length: int) -> IndexSet:
        return IndexSet(self.indices[:length], self.axis)


@dataclass
class SelectionTrace:
    """Per-iteration diagnostics.

    ``pivot_magnitudes`` holds ``|R_k(i, j)|`` for ACA and the winning residual
    norm for the blockwise selection. ``shared_vectors`` is only filled when
    the caller asks for it.
    """

    pivot_magnitudes: list[float] = field(default_factory=list)
    terminated_early: bool = False
    shared_vectors: list[np.ndarray] = field(default_factory=list)

    @property
    def iterations_run(self) -> int:
        return len(self.pivot_magnitudes)


def aca_sequential(A, r: int, tol: float = DEFAULT_TOL):
    """Greedy full-pivot cross approximation.

    Each step picks the largest ``|R(i, j)|`` of the residual (first in
    row-major order on ties) and subtracts the cross through it. Stops early
    once the pivot magnitude drops to ``tol`` times the initial Chebyshev norm.

    Returns ``(I, J, trace)``.
    """
    A = as_matrix(A)
    m, n = A.shape
    if r < 1 or r > min(m, n):
        raise InvalidRankError(f"rank must satisfy 1 <= r <= {min(m, n)}, got {r}")
    if tol < 0:
        raise InvalidArgumentError(f"tol must be >= 0, got {tol}")

    R = A.copy()
    threshold = tol * chebyshev_norm(A)
    rows: list[int] = []
    cols: list[int] = []
    trace = SelectionTrace()
    for _ in range(r):
        flat = int(np.argmax(np.abs(R)))
        i, j = divmod(flat, n)
        pivot = R[i, j]
        if abs(pivot) <= threshold:
            trace.terminated_early = True
            break
        rows.append(i)
        cols.append(j)
        trace.pivot_magnitudes.append(float(abs(pivot)))
        col = R[:, j].copy()
        row = R[i, :].copy()
        R -= np.outer(col, row) / pivot
        # exact zeros on the cross keep pivots from repeating
        R[i, :] = 0.0
        R[:, j] = 0.0
    return IndexSet(tuple(rows), Axis.ROWS), IndexSet(tuple(cols), Axis.COLS), trace


class _Blocks:
    """Private working copy of ``A`` split into blocks along one axis."""

    def __init__(self, A: np.ndarray, b: int, axis: Axis):
        self.axis = axis
        dim = A.shape[axis]
        self.part = partition(dim, b, axis)
        if axis == Axis.ROWS:
            work = A.copy()
            self.blocks = [work[s : s + w] for s, w in self.part.offsets]
        else:
            # explicit copy: a single full-width block would otherwise alias A
            self.blocks = [np.array(A[:, s : s + w], order="C") for s, w in self.part.offsets]
        self.norms = [np.empty(w) for _, w in self.part.offsets]
        self._coef = [np.empty(w) for _, w in self.part.offsets]

    def scan(self, k: int) -> None:
        if self.axis == Axis.ROWS:
            _kernels.row_norms(self.blocks[k], self.norms[k])
        else:
            _kernels.col_norms(self.blocks[k], self.norms[k])

    def deflate(self, k: int, v: np.ndarray, vv: float) -> None:
        if self.axis == Axis.ROWS:
            _kernels.row_deflate_norms(self.blocks[k], v, vv, self.norms[k])
        else:
            _kernels.col_deflate_norms(self.blocks[k], v, vv, self._coef[k], self.norms[k])

    def argmax(self) -> tuple[int, float]:
        """Global argmax of the residual norms, ties to the smallest index.

        Local winners are combined in block order with a strict comparison,
        so the result does not depend on which thread finished first.
        """
        best_idx, best = -1, -1.0
        for (start, _), norms in zip(self.part.offsets, self.norms):
            local = int(np.argmax(norms))
            if norms[local] > best:
                best = float(norms[local])
                best_idx = start + local
        return best_idx, best

    def vector(self, index: int) -> np.ndarray:
        k, j = self.part.block_of(index)
        if self.axis == Axis.ROWS:
            return self.blocks[k][j].copy()
        return self.blocks[k][:, j].copy()

    def zero(self, index: int) -> None:
        k, j = self.part.block_of(index)
        if self.axis == Axis.ROWS:
            self.blocks[k][j] = 0.0
        else:
            self.blocks[k][:, j] = 0.0
        self.norms[k][j] = 0.0


def _run_all(executor: Executor | None, fn, count: int) -> None:
    if executor is None or count == 1:
        for k in range(count):
            fn(k)
        return
    for future in [executor.submit(fn, k) for k in range(count)]:
        future.result()


def blockwise_select(
    A,
    r: int,
    b: int = 1,
    axis=Axis.ROWS,
    tol: float = DEFAULT_TOL,
    threads: int = 1,
    executor: Executor | None = None,
    keep_vectors: bool = False,
):
    """Select ``r`` rows (or columns) of largest residual norm with deflation.

    The chosen axis is split into ``b`` contiguous blocks. Every iteration scans
    residual norms block by block, reduces to the global winner, broadcasts
    the winning residual vector ``v`` (cleaned against earlier picks, see
    :func:`_reorthogonalize`) and projects every residual vector off it:
    ``a <- a - (<a, v> / <v, v>) v``. Iteration stops early when the
    winning norm is at most ``tol`` times the first one.

    Blocks run on ``executor`` when given, otherwise on a private pool of
    ``threads`` workers. The result is bit-identical for every ``b`` and every
    thread count.

    Returns ``(I, trace)``.
    """
    A = as_matrix(A)
    axis = as_axis(axis)
    dim = A.shape[axis]
    if r < 1 or r > dim:
        raise InvalidArgumentError(f"r must satisfy 1 <= r <= {dim}, got {r}")
    if b < 1 or b > dim:
        raise InvalidArgumentError(f"b must satisfy 1 <= b <= {dim}, got {b}")
    if tol < 0:
        raise InvalidArgumentError(f"tol must be >= 0, got {tol}")
    if threads < 1:
        raise InvalidArgumentError(f"threads must be >= 1, got {threads}")

    own_pool = None
    if executor is None and threads > 1 and b > 1:
        own_pool = executor = ThreadPoolExecutor(max_workers=threads)
    try:
        return _select(A, r, b, axis, tol, executor, keep_vectors)
    finally:
        if own_pool is not None:
            own_pool.shutdown()


def _reorthogonalize(v: np.ndarray, shared) -> np.ndarray:
    """Project ``v`` off the earlier shared vectors, two passes.

    Deflation alone leaves O(eps * |a|) components along earlier directions in
    every residual; once residual norms get small relative to ``|a|`` those
    components dominate. Two classical passes restore orthogonality to
    working precision. Runs serially, so it does not affect determinism.
    """
    if not shared:
        return v
    w = v.copy()
    for _ in range(2):
        for u, uu in shared:
            w -= (_kernels.dot(w, u) / uu) * u
    # exact cancellation would leave nothing to project on; keep the raw vector
    return w if w.any() else v


def _select(A, r, b, axis, tol, executor, keep_vectors):
    work = _Blocks(A, b, axis)
    _run_all(executor, work.scan, b)

    trace = SelectionTrace()
    selected: list[int] = []
    shared: list[tuple[np.ndarray, float]] = []
    threshold = None
    for _ in range(r):
        idx, norm = work.argmax()
        if threshold is None:
            threshold = tol * norm
        if norm <= threshold:
            trace.terminated_early = True
            break
        v = _reorthogonalize(work.vector(idx), shared)
        vv = float(_kernels.dot(v, v))
        shared.append((v, vv))
        selected.append(idx)
        trace.pivot_magnitudes.append(norm)
        if keep_vectors:
            trace.shared_vectors.append(v)
        _run_all(executor, lambda k: work.deflate(k, v, vv), b)
        work.zero(idx)
    return IndexSet(tuple(selected), axis), trace
