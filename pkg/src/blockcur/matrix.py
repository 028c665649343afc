"""Dense matrix carrier, test-matrix generators, norms and file I/O.

Matrices are plain ``numpy.ndarray`` objects of dtype float64 in C (row-major)
order. :func:`as_matrix` is the single gate that enforces that contract.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from .errors import (
    InvalidDimensionError,
    InvalidPartitionError,
    InvalidRankError,
    InvalidShapeError,
    MatrixLoadError,
)

MM_BANNER = "%%MatrixMarket matrix array real general"
_BIN_HEADER = struct.Struct("<QQ")

FORMAT_ALIASES = {
    "mm": "mm",
    "matrix-market": "mm",
    "matrix-market-dense": "mm",
    "bin": "bin",
    "raw": "bin",
    "raw-binary": "bin",
}


class Axis(IntEnum):
    ROWS = 0
    COLS = 1


def as_axis(axis) -> Axis:
    if isinstance(axis, str):
        try:
            return Axis[axis.upper()]
        except KeyError:
            raise InvalidShapeError(f"unknown axis {axis!r}") from None
    try:
        return Axis(int(axis))
    except ValueError:
        raise InvalidShapeError(f"unknown axis {axis!r}") from None


def as_matrix(A, copy: bool = False) -> np.ndarray:
    """Validate ``A`` as a finite, non-empty 2-D float64 row-major array."""
    M = np.array(A, dtype=np.float64, order="C", copy=copy or None)
    if M.ndim != 2:
        raise InvalidShapeError(f"expected a 2-D matrix, got ndim={M.ndim}")
    if M.shape[0] < 1 or M.shape[1] < 1:
        raise InvalidDimensionError(f"matrix dimensions must be >= 1, got {M.shape}")
    if not np.all(np.isfinite(M)):
        bad = np.argwhere(~np.isfinite(M))[0]
        raise InvalidShapeError(f"non-finite entry at ({bad[0]}, {bad[1]})")
    return M


# ---------------------------------------------------------------------------
# generators


def gen_hilbert(n: int) -> np.ndarray:
    """Hilbert matrix ``H[i, j] = 1 / (i + j + 1)`` with 0-based indices."""
    if n < 1:
        raise InvalidDimensionError(f"Hilbert size must be >= 1, got {n}")
    i = np.arange(n, dtype=np.float64)
    return 1.0 / (i[:, None] + i[None, :] + 1.0)


def gen_synthetic_lowrank(n: int, r: int) -> np.ndarray:
    """Rank-``r`` test matrix ``H = A @ B`` with Cauchy-type factors.

    ``A`` is ``n x r`` and ``B`` is ``r x n``, both with entries ``1 / (i + j)``
    over 1-based indices, so ``B == A.T`` and ``H`` is symmetric.
    """
    if n < 1:
        raise InvalidDimensionError(f"size must be >= 1, got {n}")
    if r < 1 or r > n:
        raise InvalidRankError(f"rank must satisfy 1 <= r <= n={n}, got {r}")
    i = np.arange(1, n + 1, dtype=np.float64)
    j = np.arange(1, r + 1, dtype=np.float64)
    left = 1.0 / (i[:, None] + j[None, :])
    right = 1.0 / (j[:, None] + i[None, :])
    return np.ascontiguousarray(left @ right)


# ---------------------------------------------------------------------------
# partitioning


@dataclass(frozen=True)
class BlockPartition:
    """Contiguous split of one axis into ``len(offsets)`` blocks.

    ``offsets`` holds one ``(start, length)`` pair per block, in order.
    """

    axis: Axis
    offsets: tuple[tuple[int, int], ...]

    @property
    def block_count(self) -> int:
        return len(self.offsets)

    @property
    def dim_size(self) -> int:
        start, length = self.offsets[-1]
        return start + length

    def lengths(self) -> list[int]:
        return [length for _, length in self.offsets]

    def block_of(self, index: int) -> tuple[int, int]:
        """Return ``(block, local_offset)`` for a global index."""
        for k, (start, length) in enumerate(self.offsets):
            if start <= index < start + length:
                return k, index - start
        raise IndexError(f"index {index} outside partition of size {self.dim_size}")


def partition(dim_size: int, b: int, axis=Axis.ROWS) -> BlockPartition:
    """Split ``range(dim_size)`` into ``b`` contiguous blocks.

    The first ``dim_size % b`` blocks get one extra element.
    """
    if b < 1 or b > dim_size:
        raise InvalidPartitionError(
            f"block count must satisfy 1 <= b <= {dim_size}, got {b}"
        )
    base, extra = divmod(dim_size, b)
    offsets = []
    start = 0
    for k in range(b):
        length = base + 1 if k < extra else base
        offsets.append((start, length))
        start += length
    return BlockPartition(as_axis(axis), tuple(offsets))


# ---------------------------------------------------------------------------
# norms


def frobenius_norm(A) -> float:
    A = np.asarray(A, dtype=np.float64)
    scale = chebyshev_norm(A)
    if scale == 0.0:
        return 0.0
    # scaled so tiny or huge entries neither underflow nor overflow when squared
    S = (A / scale).ravel()
    return scale * float(np.sqrt(np.dot(S, S)))


def chebyshev_norm(A) -> float:
    """Largest absolute entry."""
    A = np.asarray(A, dtype=np.float64)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A)))


# ---------------------------------------------------------------------------
# file I/O


def resolve_format(path, fmt: str | None = None) -> str:
    if fmt is None:
        return "mm" if Path(path).suffix.lower() in (".mtx", ".mm") else "bin"
    try:
        return FORMAT_ALIASES[fmt.lower()]
    except KeyError:
        raise MatrixLoadError(f"unknown matrix format {fmt!r}") from None


def store_matrix(A, path, fmt: str | None = None) -> None:
    """Write ``A`` as Matrix Market dense (``mm``) or raw binary (``bin``)."""
    A = as_matrix(A)
    fmt = resolve_format(path, fmt)
    rows, cols = A.shape
    if fmt == "bin":
        with open(path, "wb") as fh:
            fh.write(_BIN_HEADER.pack(rows, cols))
            fh.write(A.astype("<f8", copy=False).tobytes(order="C"))
        return
    with open(path, "w", encoding="ascii") as fh:
        fh.write(MM_BANNER + "\n")
        fh.write(f"{rows} {cols}\n")
        # array format stores entries column by column
        for value in A.ravel(order="F"):
            fh.write(f"{value:.17g}\n")


def load_matrix(path, fmt: str | None = None) -> np.ndarray:
    fmt = resolve_format(path, fmt)
    if fmt == "bin":
        return _load_bin(path)
    return _load_mm(path)


def _load_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        payload = fh.read()
    if len(payload) < _BIN_HEADER.size:
        raise MatrixLoadError(
            f"{path}: truncated header ({len(payload)} of {_BIN_HEADER.size} bytes)"
        )
    rows, cols = _BIN_HEADER.unpack_from(payload)
    if rows < 1 or cols < 1:
        raise MatrixLoadError(f"{path}: invalid dimensions {rows}x{cols} in header")
    expected = _BIN_HEADER.size + 8 * rows * cols
    if len(payload) != expected:
        raise MatrixLoadError(
            f"{path}: dimension mismatch, header says {rows}x{cols} "
            f"({expected} bytes) but file has {len(payload)} bytes"
        )
    data = np.frombuffer(payload, dtype="<f8", offset=_BIN_HEADER.size)
    A = data.astype(np.float64).reshape(rows, cols)
    _check_finite(A, path)
    return A


def _load_mm(path) -> np.ndarray:
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixLoadError(f"{path}:1: empty file")
    banner = lines[0].split()
    if (
        len(banner) != 5
        or banner[0] != "%%MatrixMarket"
        or [t.lower() for t in banner[1:]] != ["matrix", "array", "real", "general"]
    ):
        raise MatrixLoadError(f"{path}:1: malformed header {lines[0]!r}")

    body = [
        (lineno, line.strip())
        for lineno, line in enumerate(lines[1:], start=2)
        if line.strip() and not line.lstrip().startswith("%")
    ]
    if not body:
        raise MatrixLoadError(f"{path}: missing size line")
    lineno, size_line = body[0]
    parts = size_line.split()
    try:
        if len(parts) != 2:
            raise ValueError
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise MatrixLoadError(f"{path}:{lineno}: malformed size line {size_line!r}") from None
    if rows < 1 or cols < 1:
        raise MatrixLoadError(f"{path}:{lineno}: invalid dimensions {rows}x{cols}")

    entries = body[1:]
    if len(entries) != rows * cols:
        raise MatrixLoadError(
            f"{path}: dimension mismatch, expected {rows * cols} entries, "
            f"found {len(entries)}"
        )
    values = np.empty(rows * cols, dtype=np.float64)
    for k, (lineno, text) in enumerate(entries):
        try:
            values[k] = float(text)
        except ValueError:
            raise MatrixLoadError(f"{path}:{lineno}: cannot parse entry {text!r}") from None
        if not np.isfinite(values[k]):
            raise MatrixLoadError(
                f"{path}:{lineno}: non-finite entry at ({k % rows}, {k // rows})"
            )
    return np.ascontiguousarray(values.reshape((rows, cols), order="F"))


def _check_finite(A: np.ndarray, path) -> None:
    finite = np.isfinite(A)
    if not finite.all():
        i, j = np.argwhere(~finite)[0]
        raise MatrixLoadError(f"{os.fspath(path)}: non-finite entry at ({i}, {j})")
