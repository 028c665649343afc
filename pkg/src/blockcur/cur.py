"""CUR factor assembly, reconstruction and error measurement."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CurError, InvalidArgumentError, InvalidIndexError
from .matrix import Axis, as_matrix, frobenius_norm
from .oracle import jacobi_svd
from .selection import DEFAULT_TOL, IndexSet, blockwise_select

PINV_RTOL = 1e-12
_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class CurFactors:
    """Columns ``C = A[:, J]``, raw core ``A[I, J]`` and rows ``R = A[I, :]``.

    The core is kept exact; pseudo-inversion happens in :func:`evaluate`.
    """

    C: np.ndarray
    core: np.ndarray
    R: np.ndarray
    I: IndexSet
    J: IndexSet

    @property
    def shape(self) -> tuple[int, int]:
        return self.C.shape[0], self.R.shape[1]


def _check_indices(idx, dim: int, name: str) -> np.ndarray:
    values = [int(i) for i in idx]
    if not values:
        raise InvalidIndexError(f"{name} must not be empty")
    if len(set(values)) != len(values):
        raise InvalidIndexError(f"{name} has duplicate indices: {values}")
    bad = [i for i in values if i < 0 or i >= dim]
    if bad:
        raise InvalidIndexError(f"{name} indices {bad} out of range [0, {dim})")
    return np.asarray(values, dtype=np.intp)


def assemble(A, I, J) -> CurFactors:
    A = as_matrix(A)
    rows = _check_indices(I, A.shape[0], "I")
    cols = _check_indices(J, A.shape[1], "J")
    return CurFactors(
        C=np.ascontiguousarray(A[:, cols]),
        core=np.ascontiguousarray(A[np.ix_(rows, cols)]),
        R=np.ascontiguousarray(A[rows, :]),
        I=IndexSet(tuple(int(i) for i in rows), Axis.ROWS),
        J=IndexSet(tuple(int(j) for j in cols), Axis.COLS),
    )


def pseudoinverse(M, tol: float = PINV_RTOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse from the Jacobi SVD.

    Singular values at or below ``tol * sigma_max`` are treated as zero.
    """
    M = as_matrix(M)
    U, s, Vt = jacobi_svd(M)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((M.shape[1], M.shape[0]))
    keep = s > tol * s[0]
    return (Vt[keep].T / s[keep]) @ U[:, keep].T


def apply_core_inverse(core, R, tol: float = PINV_RTOL) -> np.ndarray:
    """Return ``pinv(core) @ R``.

    A square core that is numerically nonsingular is applied through an LU
    solve: for the badly conditioned cores that greedy cross selection
    produces, the SVD route loses several digits of the final CUR product
    while the solve does not. Anything else goes through :func:`pseudoinverse`.
    """
    core = as_matrix(core)
    k = core.shape[0]
    if k == core.shape[1]:
        s = jacobi_svd(core)[1]
        if s[0] > 0.0 and s[-1] > k * _EPS * s[0]:
            return np.linalg.solve(core, R)
    return pseudoinverse(core, tol) @ R


def evaluate(f: CurFactors, tol: float = PINV_RTOL) -> np.ndarray:
    """Reconstruct ``C @ pinv(core) @ R``."""
    return f.C @ apply_core_inverse(f.core, f.R, tol)


def relative_error(A, f: CurFactors, tol: float = PINV_RTOL, chunk_rows: int = 1024) -> float:
    """``||A - C pinv(core) R||_F / ||A||_F``, accumulated over row chunks."""
    A = as_matrix(A)
    norm = frobenius_norm(A)
    if norm == 0.0:
        raise ZeroDivisionError("relative error undefined for a zero matrix")
    right = apply_core_inverse(f.core, f.R, tol)
    total = 0.0
    for start in range(0, A.shape[0], chunk_rows):
        block = A[start : start + chunk_rows] - f.C[start : start + chunk_rows] @ right
        total += float(np.einsum("ij,ij->", block, block))
    return float(np.sqrt(total)) / norm


def decompose(
    A,
    r: int,
    c: int | None = None,
    b: int = 1,
    tol: float = DEFAULT_TOL,
    threads: int = 1,
) -> CurFactors:
    """Blockwise CUR: select rows and columns independently, then gather.

    Row and column selections run concurrently, sharing one pool of
    ``threads`` workers for their block tasks. If early termination leaves
    ``|I| != |J|`` both are cut to the shorter length.
    """
    A = as_matrix(A)
    m, n = A.shape
    c = r if c is None else c
    if r < 1 or r > m:
        raise InvalidArgumentError(f"r must satisfy 1 <= r <= {m}, got {r}")
    if c < 1 or c > n:
        raise InvalidArgumentError(f"c must satisfy 1 <= c <= {n}, got {c}")
    if b < 1 or b > min(m, n):
        raise InvalidArgumentError(f"b must satisfy 1 <= b <= {min(m, n)}, got {b}")

    if threads <= 1:
        I, _ = blockwise_select(A, r, b, Axis.ROWS, tol)
        J, _ = blockwise_select(A, c, b, Axis.COLS, tol)
    else:
        # block tasks never wait on other tasks, so the two drivers can
        # share the worker pool without deadlock
        with ThreadPoolExecutor(max_workers=threads) as pool, ThreadPoolExecutor(2) as drivers:
            rows = drivers.submit(blockwise_select, A, r, b, Axis.ROWS, tol, executor=pool)
            cols = drivers.submit(blockwise_select, A, c, b, Axis.COLS, tol, executor=pool)
            I, _ = rows.result()
            J, _ = cols.result()

    k = min(len(I), len(J))
    if k == 0:
        raise CurError("selection returned no indices (matrix is numerically zero)")
    return assemble(A, I.truncated(k), J.truncated(k))
