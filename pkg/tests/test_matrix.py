import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blockcur import (
    Axis,
    InvalidDimensionError,
    InvalidPartitionError,
    InvalidRankError,
    MatrixLoadError,
    chebyshev_norm,
    frobenius_norm,
    gen_hilbert,
    gen_synthetic_lowrank,
    load_matrix,
    partition,
    singular_values,
    store_matrix,
)
from blockcur.matrix import as_matrix

# smallest singular value of the 3x3 Hilbert matrix; Jacobi and LAPACK
# agree to 5e-18
HILBERT3_SIGMA_MIN = 0.0026873403557735


def test_hilbert_small():
    assert gen_hilbert(1).tolist() == [[1.0]]
    np.testing.assert_array_equal(gen_hilbert(2), [[1.0, 0.5], [0.5, 1 / 3]])


def test_hilbert_smallest_singular_value():
    s = singular_values(gen_hilbert(3))
    assert s[-1] == pytest.approx(HILBERT3_SIGMA_MIN, rel=1e-12)
    assert s[-1] == pytest.approx(np.linalg.svd(gen_hilbert(3), compute_uv=False)[-1], rel=1e-12)


@pytest.mark.parametrize("n", [1, 5, 17, 64])
def test_hilbert_symmetric_to_the_bit(n):
    H = gen_hilbert(n)
    assert np.array_equal(H, H.T)
    assert H.max() == 1.0 and H.min() > 0.0


def test_hilbert_rejects_zero():
    with pytest.raises(InvalidDimensionError):
        gen_hilbert(0)


def test_synthetic_small():
    np.testing.assert_allclose(gen_synthetic_lowrank(1, 1), [[0.25]], rtol=0, atol=0)
    np.testing.assert_allclose(
        gen_synthetic_lowrank(2, 1), [[1 / 4, 1 / 6], [1 / 6, 1 / 9]], rtol=1e-15
    )


def test_synthetic_numerical_rank():
    s = singular_values(gen_synthetic_lowrank(8, 3))
    assert s[3] / s[0] < 1e-12
    assert s[2] / s[0] > 1e-6


@pytest.mark.parametrize("n,r", [(0, 1), (4, 0), (4, 5)])
def test_synthetic_rejects_bad_rank(n, r):
    with pytest.raises((InvalidRankError, InvalidDimensionError)):
        gen_synthetic_lowrank(n, r)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 64), r=st.integers(1, 8))
def test_synthetic_rank_bound(n, r):
    r = min(r, n)
    A = gen_synthetic_lowrank(n, r)
    np.testing.assert_allclose(A, A.T, rtol=1e-14)
    if r < n:
        s = singular_values(A)
        assert s[r] <= 1e-10 * s[0]


@pytest.mark.parametrize(
    "dim,b,lengths",
    [(10, 3, [4, 3, 3]), (8, 8, [1] * 8), (7, 1, [7])],
)
def test_partition_examples(dim, b, lengths):
    p = partition(dim, b, Axis.ROWS)
    assert p.lengths() == lengths
    assert p.offsets[0][0] == 0


@pytest.mark.parametrize("dim,b", [(5, 0), (5, 6)])
def test_partition_rejects(dim, b):
    with pytest.raises(InvalidPartitionError):
        partition(dim, b)


@given(st.integers(1, 100).flatmap(lambda d: st.tuples(st.just(d), st.integers(1, d))))
def test_partition_covers(args):
    dim, b = args
    p = partition(dim, b, Axis.COLS)
    assert p.block_count == b
    cursor = 0
    for start, length in p.offsets:
        assert start == cursor and length >= 1
        cursor += length
    assert cursor == dim
    assert max(p.lengths()) - min(p.lengths()) <= 1
    assert p.lengths() == sorted(p.lengths(), reverse=True)


def test_norm_examples():
    assert frobenius_norm([[3.0, 4.0]]) == 5.0
    assert frobenius_norm(np.zeros((4, 4))) == 0.0
    assert frobenius_norm(gen_hilbert(2)) == pytest.approx(math.sqrt(1 + 2 / 4 + 1 / 9), rel=1e-15)
    assert chebyshev_norm([[-7.0, 2.0], [3.0, 0.0]]) == 7.0
    assert chebyshev_norm(np.zeros((3, 3))) == 0.0
    assert chebyshev_norm(gen_hilbert(5)) == 1.0


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 8)), elements=finite))
def test_chebyshev_below_frobenius(A):
    assert chebyshev_norm(A) <= frobenius_norm(A) * (1 + 1e-15)


def test_as_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])


# --- file I/O -------------------------------------------------------------


def test_bin_round_trip_bit_exact(tmp_path):
    H = gen_hilbert(4)
    store_matrix(H, tmp_path / "h.bin", "bin")
    back = load_matrix(tmp_path / "h.bin", "bin")
    assert back.shape == (4, 4)
    assert back.tobytes() == H.tobytes()


def test_bin_header_layout(tmp_path):
    store_matrix(np.arange(6.0).reshape(2, 3), tmp_path / "a.bin", "raw-binary")
    raw = (tmp_path / "a.bin").read_bytes()
    assert len(raw) == 16 + 6 * 8
    assert int.from_bytes(raw[:8], "little") == 2
    assert int.from_bytes(raw[8:16], "little") == 3
    assert np.frombuffer(raw[16:], "<f8").tolist() == [0, 1, 2, 3, 4, 5]


def test_bin_truncated(tmp_path):
    store_matrix(gen_hilbert(4), tmp_path / "h.bin")
    raw = (tmp_path / "h.bin").read_bytes()
    (tmp_path / "t.bin").write_bytes(raw[:-5])
    with pytest.raises(MatrixLoadError, match="mismatch"):
        load_matrix(tmp_path / "t.bin")
    (tmp_path / "t2.bin").write_bytes(raw[:7])
    with pytest.raises(MatrixLoadError, match="header"):
        load_matrix(tmp_path / "t2.bin")


def test_bin_nonfinite(tmp_path):
    raw = (2).to_bytes(8, "little") + (1).to_bytes(8, "little")
    raw += np.array([1.0, np.inf], "<f8").tobytes()
    (tmp_path / "x.bin").write_bytes(raw)
    with pytest.raises(MatrixLoadError, match=r"\(1, 0\)"):
        load_matrix(tmp_path / "x.bin")


def test_mm_round_trip(tmp_path):
    ones = np.ones((3, 2))
    store_matrix(ones, tmp_path / "o.mtx", "mm")
    text = (tmp_path / "o.mtx").read_text()
    assert text.startswith("%%MatrixMarket matrix array real general\n3 2\n")
    np.testing.assert_allclose(load_matrix(tmp_path / "o.mtx"), ones, rtol=1e-15)


def test_mm_round_trip_column_major(tmp_path):
    A = np.random.default_rng(3).standard_normal((4, 3))
    store_matrix(A, tmp_path / "a.mtx")
    lines = (tmp_path / "a.mtx").read_text().split()
    # entries follow the banner (5 tokens) and the size line (2 tokens)
    assert float(lines[7]) == A[0, 0] and float(lines[8]) == A[1, 0]
    np.testing.assert_allclose(load_matrix(tmp_path / "a.mtx", "mm"), A, rtol=1e-15)


@pytest.mark.parametrize(
    "body,match",
    [
        ("%%MatrixMarket matrix coordinate real general\n2 2\n", "header"),
        ("%%MatrixMarket matrix array real general\n2 x\n", ":2:"),
        ("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n", "mismatch"),
        ("%%MatrixMarket matrix array real general\n% note\n1 2\n1\nabc\n", ":5:"),
        ("%%MatrixMarket matrix array real general\n1 2\n1\nnan\n", r":4: non-finite"),
    ],
)
def test_mm_malformed(tmp_path, body, match):
    (tmp_path / "bad.mtx").write_text(body)
    with pytest.raises(MatrixLoadError, match=match):
        load_matrix(tmp_path / "bad.mtx")
