import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockcur import (
    BudgetError,
    InvalidShapeError,
    aca_sequential,
    brute_force_maxvol,
    chebyshev_norm,
    gen_hilbert,
    gen_synthetic_lowrank,
    jacobi_svd,
    singular_values,
    verify_theorem1,
    verify_theorem2,
    volume,
)
from oracles import maxvol_enumerate

PHI = (1 + math.sqrt(5)) / 2


def test_volume_examples():
    assert volume([[1.0, 2.0], [3.0, 4.0]]) == pytest.approx(2.0, rel=1e-15)
    assert volume(np.eye(5)) == 1.0
    assert volume([[1.0, 2.0], [2.0, 4.0]]) <= 1e-14


def test_volume_rejects_rectangular():
    with pytest.raises(InvalidShapeError):
        volume(np.ones((2, 3)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 7))
def test_volume_permutation_invariant(seed, n):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n, n))
    P = M[rng.permutation(n)][:, rng.permutation(n)]
    v = volume(M)
    assert volume(P) == pytest.approx(v, rel=1e-12, abs=1e-300)
    assert v == pytest.approx(abs(np.linalg.det(M)), rel=1e-12)


def test_maxvol_diagonal():
    A = np.diag([3.0, 2.0, 1.0])
    one = brute_force_maxvol(A, 1)
    assert (list(one.I), list(one.J), one.volume) == ([0], [0], 3.0)
    two = brute_force_maxvol(A, 2)
    assert (list(two.I), list(two.J), two.volume) == ([0, 1], [0, 1], 6.0)
    assert two.candidates_examined == 9


def test_maxvol_random_six_by_six():
    A = np.random.default_rng(2024).standard_normal((6, 6))
    res = brute_force_maxvol(A, 2)
    assert res.candidates_examined == 225
    assert res.volume == pytest.approx(maxvol_enumerate(A, 2), rel=1e-12)
    I, J = list(res.I), list(res.J)
    assert res.volume == pytest.approx(abs(np.linalg.det(A[np.ix_(I, J)])), rel=1e-12)


def test_maxvol_lexicographic_tie_break():
    res = brute_force_maxvol(np.ones((4, 3)), 1)
    assert (list(res.I), list(res.J)) == ([0], [0])


def test_maxvol_budget():
    with pytest.raises(BudgetError):
        brute_force_maxvol(np.ones((30, 30)), 5)
    with pytest.raises(BudgetError):
        brute_force_maxvol(np.ones((6, 6)), 2, budget=100)


@pytest.mark.parametrize("seed", range(8))
def test_maxvol_beats_aca(seed):
    A = np.random.default_rng(seed).standard_normal((6, 5))
    for r in (1, 2, 3):
        I, J, _ = aca_sequential(A, r, tol=0.0)
        aca_vol = volume(A[np.ix_(list(I), list(J))])
        assert brute_force_maxvol(A, r).volume >= aca_vol * (1 - 1e-12)


def test_singular_values_examples():
    np.testing.assert_allclose(singular_values(np.eye(4)), np.ones(4), rtol=1e-15)
    np.testing.assert_array_equal(singular_values(np.diag([5.0, 0.0])), [5.0, 0.0])
    np.testing.assert_allclose(singular_values([[1.0, 1.0], [0.0, 1.0]]), [PHI, 1 / PHI], rtol=1e-14)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 12), n=st.integers(1, 12))
def test_singular_values_against_lapack(seed, m, n):
    A = np.random.default_rng(seed).standard_normal((m, n))
    s = singular_values(A)
    ref = np.linalg.svd(A, compute_uv=False)
    assert s.shape == (min(m, n),)
    assert np.all(np.diff(s) <= 0)
    np.testing.assert_allclose(s, ref, rtol=0, atol=1e-12 * ref[0])
    assert np.sum(s**2) == pytest.approx(np.sum(A**2), rel=1e-10)
    assert s[0] >= chebyshev_norm(A) * (1 - 1e-14)


@pytest.mark.parametrize("shape", [(7, 4), (4, 7), (5, 5)])
def test_jacobi_svd_reconstructs(shape):
    A = np.random.default_rng(5).standard_normal(shape)
    U, s, Vt = jacobi_svd(A)
    k = min(shape)
    assert U.shape == (shape[0], k) and Vt.shape == (k, shape[1])
    np.testing.assert_allclose(U @ np.diag(s) @ Vt, A, atol=1e-13)
    np.testing.assert_allclose(U.T @ U, np.eye(k), atol=1e-13)
    np.testing.assert_allclose(Vt @ Vt.T, np.eye(k), atol=1e-13)


def test_singular_values_hilbert_and_lowrank():
    for A in (gen_hilbert(40), gen_synthetic_lowrank(48, 6)):
        s = singular_values(A)
        ref = np.linalg.svd(A, compute_uv=False)
        np.testing.assert_allclose(s, ref, rtol=0, atol=1e-13 * ref[0])


def test_singular_values_cap():
    with pytest.raises(BudgetError):
        singular_values(np.ones((5, 5)), cap=4)


def test_theorems_rank_deficient():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 6))
    for check in (verify_theorem1, verify_theorem2):
        res = check(A, 2)
        assert res.holds and not res.skipped
        assert res.lhs <= 1e-10 * chebyshev_norm(A)
        assert res.rhs <= 1e-12 * chebyshev_norm(A) * 3


def test_theorems_hilbert7():
    one = verify_theorem1(gen_hilbert(7), 2)
    two = verify_theorem2(gen_hilbert(7), 2)
    assert one.holds and two.holds
    assert one.lhs == two.lhs
    assert two.rhs <= one.rhs


def test_theorems_skip_singular_core():
    A = np.zeros((4, 4))
    A[0, 0] = 1.0
    res = verify_theorem1(A, 2)
    assert res.skipped and res.holds


@pytest.mark.parametrize("seed", range(20))
def test_theorems_random(seed):
    A = np.random.default_rng(seed).standard_normal((6, 6))
    for r in (1, 2, 3):
        one, two = verify_theorem1(A, r), verify_theorem2(A, r)
        assert one.holds and two.holds
        assert two.rhs <= one.rhs
        assert two.rhs_basic == one.rhs


@pytest.mark.parametrize("shape", [(3, 8), (8, 3), (4, 4)])
def test_oracles_leave_input_untouched(shape):
    A = np.random.default_rng(9).standard_normal(shape)
    before = A.copy()
    jacobi_svd(A)
    volume(A[:3, :3])
    brute_force_maxvol(A, 2)
    verify_theorem2(A, 2)
    assert np.array_equal(A, before)
