"""Tile-sized TRMM/TRSM kernels that terminate the recursion.

Every variant is reduced to one lower-triangular, left-side problem on numpy
views: a Right problem becomes Left on ``B.T``, a transposed A is read as
``A.T``, and an upper-triangular op(A) is read with both indices reversed.
None of these reductions copy.

The solve follows the workgroup formulation: columns of B are independent
(one group each), rows are processed one elimination step at a time, and
each row is pre-divided by its diagonal so every step is a multiply-subtract.
"""

from __future__ import annotations

import numpy as np

from ..core import SEQUENTIAL, Backend, MatrixLike, as_view
from ..errors import ShapeError, SingularMatrixError, TileSizeError
from ..variants import Side, TriangularSpec

DEFAULT_TILE_LIMIT = 256


def check_operands(spec: TriangularSpec, A, B):
    A, B = as_view(A), as_view(B)
    if A.rows != A.cols:
        raise ShapeError(f"A must be square, got {A.rows}x{A.cols}")
    n = A.rows
    along = B.rows if spec.side is Side.LEFT else B.cols
    if along != n:
        raise ShapeError(f"B is {B.rows}x{B.cols}, not conformal with {n}x{n} A on the {spec.side.value}")
    if A.dtype != B.dtype:
        raise TypeError("A and B must share one element type")
    return A, B


def reduce_to_lower_left(spec: TriangularSpec, a: np.ndarray, b: np.ndarray):
    """Return ``(L, X, reflected)`` with the problem rewritten as ``L @ X``.

    ``L`` is read only on and below its diagonal.  When ``reflected`` is set,
    row ``k`` of ``L`` corresponds to row ``n - 1 - k`` of A.
    """
    left = spec.side is Side.LEFT
    # Left reads op(A); Right reads op(A).T
    use_transpose = spec.transposed if left else not spec.transposed
    L = a.T if use_transpose else a
    X = b if left else b.T
    lower = spec.op_lower if left else not spec.op_lower
    if not lower:
        L = L[::-1, ::-1]
        X = X[::-1, :]
    return L, X, not lower


def _solve_lower(L: np.ndarray, X: np.ndarray, alpha: float, unit: bool) -> None:
    n = L.shape[0]
    if alpha != 1:
        X *= alpha
    if not unit:
        d = L.diagonal().copy()
        X /= d[:, None]
    # scratch laid out like X so the update streams through memory in order
    order = "F" if abs(X.strides[0]) <= abs(X.strides[1]) else "C"
    scratch = np.empty_like(X, order=order)
    for i in range(n - 1):
        col = L[i + 1:, i]
        if not unit:
            col = col / d[i + 1:]
        update = scratch[i + 1:]
        np.multiply(col[:, None], X[i], out=update)
        X[i + 1:] -= update


def _multiply_lower(L: np.ndarray, X: np.ndarray, alpha: float, unit: bool) -> None:
    # bottom row first, so every row reads only rows not yet overwritten
    n = L.shape[0]
    for i in range(n - 1, -1, -1):
        row = X[i].copy() if unit else X[i] * L[i, i]
        if i:
            row += L[i, :i] @ X[:i]
        if alpha != 1:
            row *= alpha
        X[i] = row


def _check_tile(n: int, tile_limit: int) -> None:
    if n > tile_limit:
        raise TileSizeError(f"tile of size {n} exceeds base-kernel limit {tile_limit}")


def trsm_base(spec: TriangularSpec, A: MatrixLike, B: MatrixLike, *,
              backend: Backend = SEQUENTIAL, tile_limit: int = DEFAULT_TILE_LIMIT) -> None:
    """Overwrite B with X solving ``op(A) X = alpha B`` (or ``X op(A) = alpha B``)."""
    A, B = check_operands(spec, A, B)
    n = A.rows
    _check_tile(n, tile_limit)
    L, X, reflected = reduce_to_lower_left(spec, A.array, B.array)
    if not spec.unit:
        zeros = np.flatnonzero(L.diagonal() == 0)
        if zeros.size:
            k = int(zeros[0])
            raise SingularMatrixError(n - 1 - k if reflected else k)
    backend.for_column_ranges(
        lambda j0, j1: _solve_lower(L, X[:, j0:j1], spec.alpha, spec.unit), X.shape[1])


def trmm_base(spec: TriangularSpec, A: MatrixLike, B: MatrixLike, *,
              backend: Backend = SEQUENTIAL, tile_limit: int = DEFAULT_TILE_LIMIT) -> None:
    """Overwrite B with ``alpha op(A) B`` (or ``alpha B op(A)``)."""
    A, B = check_operands(spec, A, B)
    _check_tile(A.rows, tile_limit)
    L, X, _ = reduce_to_lower_left(spec, A.array, B.array)
    backend.for_column_ranges(
        lambda j0, j1: _multiply_lower(L, X[:, j0:j1], spec.alpha, spec.unit), X.shape[1])
