"""Independent reference implementations used only by the tests.

Deliberately naive: plain Python loops and LAPACK via numpy, sharing no code
with the package under test.
"""

import itertools

import numpy as np


def aca_literal(A, r):
    """Loop-for-loop full-pivot cross approximation on nested lists."""
    R = [[float(x) for x in row] for row in np.asarray(A)]
    m, n = len(R), len(R[0])
    I, J = [], []
    for _ in range(r):
        best, bi, bj = -1.0, -1, -1
        for i in range(m):
            for j in range(n):
                if abs(R[i][j]) > best:
                    best, bi, bj = abs(R[i][j]), i, j
        if best == 0.0:
            break
        I.append(bi)
        J.append(bj)
        pivot = R[bi][bj]
        col = [R[i][bj] for i in range(m)]
        row = list(R[bi])
        R = [[R[i][j] - col[i] * row[j] / pivot for j in range(n)] for i in range(m)]
    return I, J


def greedy_norm_select(A, r, axis=0):
    """Unblocked norm-greedy selection with numpy projections, no early stop."""
    W = np.array(A, dtype=float)
    if axis == 1:
        W = W.T.copy()
    chosen, vectors = [], []
    for _ in range(r):
        norms = np.linalg.norm(W, axis=1)
        idx = int(np.argmax(norms))
        v = W[idx].copy()
        chosen.append(idx)
        vectors.append(v)
        W -= np.outer(W @ v / (v @ v), v)
        W[idx] = 0.0
    return chosen, vectors


def maxvol_enumerate(A, r):
    """Max |det| over all r x r submatrices using numpy.linalg.det."""
    A = np.asarray(A)
    m, n = A.shape
    best = -1.0
    for I in itertools.combinations(range(m), r):
        for J in itertools.combinations(range(n), r):
            v = abs(np.linalg.det(A[np.ix_(I, J)]))
            if v > best:
                best = v
    return best


def span_residual(A, rows):
    """Frobenius norm of A after projecting its rows off span(A[rows])."""
    Q, _ = np.linalg.qr(np.asarray(A)[list(rows)].T)
    return np.linalg.norm(A - (A @ Q) @ Q.T)
