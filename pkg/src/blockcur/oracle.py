"""Independent reference computations.

Nothing here touches the selection kernels: volumes come from a hand-written
LU with partial pivoting, singular values from one-sided Jacobi, and the
max-volume submatrix from exhaustive enumeration. These are what the error
bounds for maximal-volume cross approximation are checked against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import BudgetError, InvalidArgumentError, InvalidShapeError
from .matrix import Axis, as_matrix, chebyshev_norm, frobenius_norm
from .selection import IndexSet

DEFAULT_MAXVOL_BUDGET = 10**7
DEFAULT_SVD_CAP = 1024
THEOREM_REL_SLACK = 1e-9
THEOREM_ABS_FLOOR = 1e-12
SINGULAR_CORE_RTOL = 1e-12

_EPS = np.finfo(np.float64).eps
_JACOBI_MAX_SWEEPS = 80
_CHUNK = 65536


def _batched_abs_det(M: np.ndarray) -> np.ndarray:
    """``|det|`` of a stack of square matrices via LU with partial pivoting."""
    M = np.array(M, dtype=np.float64)
    count, r, _ = M.shape
    det = np.ones(count)
    rows = np.arange(count)
    for c in range(r):
        piv = c + np.argmax(np.abs(M[:, c:, c]), axis=1)
        top = M[rows, c].copy()
        M[rows, c] = M[rows, piv]
        M[rows, piv] = top
        d = M[:, c, c].copy()
        det *= np.abs(d)
        if c + 1 < r:
            safe = np.where(d == 0.0, 1.0, d)
            factors = M[:, c + 1 :, c] / safe[:, None]
            M[:, c + 1 :, c:] -= factors[:, :, None] * M[:, c, None, c:]
    return det


def volume(M) -> float:
    """Absolute determinant of a square matrix."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise InvalidShapeError(f"volume needs a square matrix, got {M.shape}")
    return float(_batched_abs_det(M[None])[0])


@dataclass(frozen=True)
class MaxvolResult:
    I: IndexSet
    J: IndexSet
    volume: float
    candidates_examined: int


def brute_force_maxvol(A, r: int, budget: int = DEFAULT_MAXVOL_BUDGET) -> MaxvolResult:
    """Exact maximum-volume ``r x r`` submatrix by exhaustive search.

    Candidates are visited in lexicographic ``(I, J)`` order and only a strictly
    larger volume replaces the incumbent, so ties resolve to the smallest pair.
    """
    A = as_matrix(A)
    m, n = A.shape
    if r < 1 or r > min(m, n):
        raise InvalidArgumentError(f"r must satisfy 1 <= r <= {min(m, n)}, got {r}")
    total = math.comb(m, r) * math.comb(n, r)
    if total > budget:
        raise BudgetError(
            f"exhaustive maxvol needs {total} candidates, budget is {budget}"
        )

    col_sets = np.array(list(itertools.combinations(range(n), r)), dtype=np.intp)
    per_chunk = max(1, _CHUNK // len(col_sets))
    best_vol, best_pair = -1.0, None
    row_iter = itertools.combinations(range(m), r)
    while True:
        row_sets = list(itertools.islice(row_iter, per_chunk))
        if not row_sets:
            break
        rs = np.array(row_sets, dtype=np.intp)
        # subs[a, b] = A[rs[a]][:, col_sets[b]]
        subs = A[rs[:, None, :, None], col_sets[None, :, None, :]]
        vols = _batched_abs_det(subs.reshape(-1, r, r))
        k = int(np.argmax(vols))
        if vols[k] > best_vol:
            best_vol = float(vols[k])
            a, c = divmod(k, len(col_sets))
            best_pair = (row_sets[a], tuple(int(x) for x in col_sets[c]))
    rows, cols = best_pair
    return MaxvolResult(
        IndexSet(tuple(int(x) for x in rows), Axis.ROWS),
        IndexSet(cols, Axis.COLS),
        best_vol,
        total,
    )


def jacobi_svd(A, cap: int = DEFAULT_SVD_CAP):
    """Thin SVD ``A = U @ diag(s) @ Vt`` by one-sided Jacobi.

    Singular values come back in descending order.
    """
    A = as_matrix(A)
    m, n = A.shape
    if min(m, n) > cap:
        raise BudgetError(f"Jacobi SVD capped at min(m, n) <= {cap}, got {min(m, n)}")
    transposed = m < n
    W = A.T if transposed else A
    # rows of G are the columns of W; always a fresh copy, since for wide
    # input W.T is A itself
    G = np.array(W.T, order="C")
    V = np.eye(G.shape[0])
    tol = math.sqrt(G.shape[1]) * _EPS
    small = (_EPS * frobenius_norm(A)) ** 2
    sweeps = _kernels.jacobi_sweeps(G, V, tol, small, _JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise RuntimeError("one-sided Jacobi did not converge")
    s = np.sqrt(np.einsum("ij,ij->i", G, G))
    order = np.argsort(-s, kind="stable")
    s = s[order]
    G = G[order]
    V = V[order]
    U = np.zeros_like(G)
    nz = s > 0
    U[nz] = G[nz] / s[nz, None]
    # U.T is m x k, V rows are right singular vectors
    if transposed:
        return V.T, s, U
    return U.T, s, V


def singular_values(A, cap: int = DEFAULT_SVD_CAP) -> np.ndarray:
    """Descending singular values, ``min(m, n)`` of them."""
    return jacobi_svd(A, cap)[1]


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of one instance check of a maxvol cross-approximation bound.

    ``skipped`` is set when the maxvol core is numerically singular, in which
    case the bound's premise does not hold and ``holds`` is vacuously true.
    """

    holds: bool
    lhs: float
    rhs: float
    skipped: bool = False
    rhs_basic: float = math.nan


def _cross_residual(A: np.ndarray, res: MaxvolResult) -> float:
    from .cur import apply_core_inverse

    I, J = res.I.to_array(), res.J.to_array()
    approx = A[:, J] @ apply_core_inverse(A[np.ix_(I, J)], A[I, :])
    return chebyshev_norm(A - approx)


def _check(A, r, improved: bool, budget: int) -> BoundCheck:
    A = as_matrix(A)
    m, n = A.shape
    if r < 1 or r >= min(m, n):
        raise InvalidArgumentError(f"r must satisfy 1 <= r < {min(m, n)}, got {r}")
    res = brute_force_maxvol(A, r, budget)
    s = singular_values(A)
    sigma_next = float(s[r])
    rhs1 = (r + 1) * sigma_next
    rhs = rhs1
    if improved and sigma_next > 0.0:
        rhs = rhs1 / math.sqrt(1.0 + float(np.sum((sigma_next / s[:r]) ** 2)))
    norm_c = chebyshev_norm(A)
    if res.volume < SINGULAR_CORE_RTOL * norm_c**r:
        return BoundCheck(True, math.nan, rhs, skipped=True, rhs_basic=rhs1)
    lhs = _cross_residual(A, res)
    holds = lhs <= rhs * (1.0 + THEOREM_REL_SLACK) + THEOREM_ABS_FLOOR * norm_c
    return BoundCheck(bool(holds), lhs, rhs, rhs_basic=rhs1)


def verify_theorem1(A, r: int, budget: int = DEFAULT_MAXVOL_BUDGET) -> BoundCheck:
    """Check ``||A - A_r||_C <= (r + 1) sigma_{r+1}`` for the maxvol cross."""
    return _check(A, r, improved=False, budget=budget)


def verify_theorem2(A, r: int, budget: int = DEFAULT_MAXVOL_BUDGET) -> BoundCheck:
    """Check the sharper bound, which divides the basic one by
    ``sqrt(1 + sum_{k<=r} sigma_{r+1}^2 / sigma_k^2)``.
    """
    check = _check(A, r, improved=True, budget=budget)
    if not check.rhs <= check.rhs_basic:
        raise AssertionError(
            f"improved bound {check.rhs} exceeds basic bound {check.rhs_basic}"
        )
    return check
