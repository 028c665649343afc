"""Compiled per-block kernels for the blockwise selection.

Every reduction here has a summation order fixed by the vector length alone,
never by the vector's position inside a block. That is what makes selections
bit-identical across block counts and thread counts. No ``fastmath``: it
would license reassociation and break that guarantee.

All kernels release the GIL so blocks can run on a thread pool.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(nogil=True, cache=True)
def _dot(x, y):
    # four interleaved partial sums, combined in a fixed pattern
    n = x.shape[0]
    s0 = 0.0
    s1 = 0.0
    s2 = 0.0
    s3 = 0.0
    k = 0
    while k + 4 <= n:
        s0 += x[k] * y[k]
        s1 += x[k + 1] * y[k + 1]
        s2 += x[k + 2] * y[k + 2]
        s3 += x[k + 3] * y[k + 3]
        k += 4
    tail = 0.0
    while k < n:
        tail += x[k] * y[k]
        k += 1
    return ((s0 + s1) + (s2 + s3)) + tail


@njit(nogil=True, cache=True)
def dot(x, y):
    return _dot(x, y)


@njit(nogil=True, cache=True)
def row_norms(block, out):
    for i in range(block.shape[0]):
        row = block[i]
        out[i] = math.sqrt(_dot(row, row))


@njit(nogil=True, cache=True)
def row_deflate_norms(block, v, vv, out):
    """Project every row of ``block`` off ``v`` and refresh its norm."""
    m = block.shape[1]
    for i in range(block.shape[0]):
        row = block[i]
        coef = _dot(row, v) / vv
        for j in range(m):
            row[j] = row[j] - coef * v[j]
        out[i] = math.sqrt(_dot(row, row))


@njit(nogil=True, cache=True)
def col_norms(block, out):
    n, w = block.shape
    for j in range(w):
        out[j] = 0.0
    for i in range(n):
        for j in range(w):
            out[j] += block[i, j] * block[i, j]
    for j in range(w):
        out[j] = math.sqrt(out[j])


@njit(nogil=True, cache=True)
def col_deflate_norms(block, v, vv, coef, out):
    """Project every column of ``block`` off ``v`` and refresh its norm.

    Column sums run over rows in ascending order, independent of the
    column's offset inside the block.
    """
    n, w = block.shape
    for j in range(w):
        coef[j] = 0.0
        out[j] = 0.0
    for i in range(n):
        vi = v[i]
        for j in range(w):
            coef[j] += vi * block[i, j]
    for j in range(w):
        coef[j] = coef[j] / vv
    for i in range(n):
        vi = v[i]
        for j in range(w):
            x = block[i, j] - vi * coef[j]
            block[i, j] = x
            out[j] += x * x
    for j in range(w):
        out[j] = math.sqrt(out[j])


@njit(nogil=True, cache=True)
def jacobi_sweeps(G, V, tol, small, max_sweeps):
    """One-sided (Hestenes) Jacobi on the rows of ``G``.

    ``G`` holds the columns of the input matrix as its rows, so each rotation
    touches contiguous memory. ``V`` accumulates the right rotations the same
    way. A pair is left alone once its cosine is below ``tol`` or either row
    has squared norm below ``small`` (pure rounding noise that no rotation
    can orthogonalize). Returns the number of sweeps used, or -1 if not
    converged.
    """
    n = G.shape[0]
    m = G.shape[1]
    nv = V.shape[1]
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            gp = G[p]
            for q in range(p + 1, n):
                gq = G[q]
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for k in range(m):
                    a = gp[k]
                    b = gq[k]
                    alpha += a * a
                    beta += b * b
                    gamma += a * b
                if gamma == 0.0 or alpha <= small or beta <= small:
                    continue
                if abs(gamma) <= tol * math.sqrt(alpha) * math.sqrt(beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if zeta >= 0.0:
                    t = 1.0 / (zeta + math.sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                for k in range(m):
                    a = gp[k]
                    b = gq[k]
                    gp[k] = c * a - s * b
                    gq[k] = s * a + c * b
                vp = V[p]
                vq = V[q]
                for k in range(nv):
                    a = vp[k]
                    b = vq[k]
                    vp[k] = c * a - s * b
                    vq[k] = s * a + c * b
        if not rotated:
            return sweep + 1
    return -1


def warmup() -> None:
    """Compile every kernel once so benchmarks do not time the JIT."""
    blk = np.ones((3, 5))
    v = np.ones(5)
    out = np.empty(3)
    row_norms(blk, out)
    row_deflate_norms(blk, v, 5.0, out)
    cblk = np.ones((5, 3))
    cv = np.ones(5)
    coef = np.empty(3)
    out3 = np.empty(3)
    col_norms(cblk, out3)
    col_deflate_norms(cblk, cv, 5.0, coef, out3)
    dot(v, v)
    G = np.eye(2)
    jacobi_sweeps(G, np.eye(2), 1e-15, 0.0, 2)
