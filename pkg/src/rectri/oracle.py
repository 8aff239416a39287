"""Brute-force TRMM/TRSM references.

Everything here materialises op(A) as a dense float64 matrix and loops
naively; none of it shares code with the kernels or the recursive driver.
"""

from __future__ import annotations

import numpy as np

from .core import as_view
from .errors import ShapeError, SingularMatrixError
from .variants import Side, TriangularSpec, Uplo


def _as_f64(M) -> np.ndarray:
    return np.array(M if isinstance(M, np.ndarray) else as_view(M).array, dtype=np.float64)


def materialize(A, uplo: Uplo, unit: bool) -> np.ndarray:
    """Dense float64 copy of the referenced triangle; the other side is zero."""
    a = _as_f64(A)
    n = a.shape[0]
    keep = np.tri(n, dtype=bool) if Uplo(uplo) is Uplo.LOWER else np.tri(n, dtype=bool).T
    dense = np.where(keep, a, 0.0)
    if unit:
        dense[np.diag_indices(n)] = 1.0
    return dense


def op_matrix(spec: TriangularSpec, A) -> np.ndarray:
    T = materialize(A, spec.uplo, spec.unit)
    return T.T.copy() if spec.transposed else T


def _naive_matmul(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    # rank-1 accumulation over the inner index, in order
    out = np.zeros((X.shape[0], Y.shape[1]))
    for k in range(X.shape[1]):
        out += np.multiply.outer(X[:, k], Y[k, :])
    return out


def oracle_trmm(spec: TriangularSpec, A, B) -> np.ndarray:
    """``alpha op(A) B`` or ``alpha B op(A)`` in float64; inputs untouched."""
    T = op_matrix(spec, A)
    b = _as_f64(B)
    n = T.shape[0]
    if spec.side is Side.LEFT:
        if b.shape[0] != n:
            raise ShapeError(f"B has {b.shape[0]} rows, A is {n}x{n}")
        return spec.alpha * _naive_matmul(T, b)
    if b.shape[1] != n:
        raise ShapeError(f"B has {b.shape[1]} columns, A is {n}x{n}")
    return spec.alpha * _naive_matmul(b, T)


def _substitute(T: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``T X = rhs`` for triangular T, one row of X at a time."""
    n = T.shape[0]
    lower = not np.any(np.triu(T, 1))
    X = np.zeros_like(rhs)
    order = range(n) if lower else range(n - 1, -1, -1)
    for i in order:
        if T[i, i] == 0:
            raise SingularMatrixError(i)
        known = slice(0, i) if lower else slice(i + 1, n)
        X[i] = (rhs[i] - T[i, known] @ X[known]) / T[i, i]
    return X


def oracle_trsm(spec: TriangularSpec, A, B) -> np.ndarray:
    """X with ``op(A) X = alpha B`` (or ``X op(A) = alpha B``) by substitution in float64."""
    T = op_matrix(spec, A)
    b = spec.alpha * _as_f64(B)
    n = T.shape[0]
    if spec.side is Side.LEFT:
        if b.shape[0] != n:
            raise ShapeError(f"B has {b.shape[0]} rows, A is {n}x{n}")
        return _substitute(T, b)
    if b.shape[1] != n:
        raise ShapeError(f"B has {b.shape[1]} columns, A is {n}x{n}")
    return _substitute(T.T.copy(), b.T.copy()).T


def relative_residual(op: str, spec: TriangularSpec, A, B_in, B_out, *,
                      sample=None, T: np.ndarray | None = None) -> float:
    """Infinity-norm relative residual of a computed TRMM/TRSM result.

    TRSM: ``|op(A) X - alpha B| / (|op(A)| |X| + |alpha| |B|)``.
    TRMM: ``|out - alpha op(A) B| / (|alpha| |op(A)| |B|)``.
    ``sample`` restricts the check to those right-hand sides (columns of B
    for Left, rows for Right).  ``T`` may carry a precomputed ``op_matrix``.
    """
    T = op_matrix(spec, A) if T is None else T
    b_in, b_out = _as_f64(B_in), _as_f64(B_out)
    if spec.side is Side.RIGHT:
        # X op(A) = alpha B  <=>  op(A)^T X^T = alpha B^T
        T, b_in, b_out = T.T, b_in.T, b_out.T
    if sample is not None:
        b_in, b_out = b_in[:, sample], b_out[:, sample]
    if b_in.size == 0:
        return 0.0
    norm_t = np.abs(T).sum(axis=1).max()
    alpha = abs(spec.alpha)
    if op == "trsm":
        diff = T @ b_out - spec.alpha * b_in
        scale = norm_t * _inf_norm(b_out) + alpha * _inf_norm(b_in)
    else:
        diff = b_out - spec.alpha * (T @ b_in)
        scale = alpha * norm_t * _inf_norm(b_in)
    err = _inf_norm(diff)
    if scale == 0:
        return 0.0 if err == 0 else float("inf")
    return float(err / scale)


def _inf_norm(M: np.ndarray) -> float:
    return float(np.abs(M).sum(axis=1).max()) if M.size else 0.0
