"""Column-major matrix storage, strided windows, and the GEMM primitive.

Everything the recursive drivers touch goes through :class:`MatrixView`, a
non-owning rectangular window onto a :class:`MatrixBuffer`.  Views never
copy; writing through a view is visible through its parent.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from .errors import AliasingError, BoundsError, ShapeError, SplitError

ELEM_KINDS = {"f32": np.dtype(np.float32), "f64": np.dtype(np.float64)}


def elem_kind_of(dtype) -> str:
    dtype = np.dtype(dtype)
    for name, dt in ELEM_KINDS.items():
        if dt == dtype:
            return name
    raise TypeError(f"unsupported element type {dtype}; expected float32 or float64")


class MatrixBuffer:
    """Owned column-major storage of a ``rows x cols`` real matrix."""

    def __init__(self, rows: int, cols: int, elem_kind: str = "f64", data=None):
        if rows < 0 or cols < 0:
            raise ShapeError(f"negative dimensions {rows}x{cols}")
        dtype = ELEM_KINDS[elem_kind]
        if data is None:
            data = np.zeros(rows * cols, dtype=dtype)
        else:
            data = np.asarray(data)
            if data.ndim != 1 or data.dtype != dtype:
                raise ShapeError("data must be a flat array of the buffer's element kind")
        if data.size != rows * cols:
            raise ShapeError(f"data length {data.size} != {rows}*{cols}")
        self.elem_kind = elem_kind
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def from_array(cls, arr, dtype=None) -> "MatrixBuffer":
        """Copy any 2-D array-like into a new column-major buffer."""
        arr = np.array(arr, dtype=dtype, order="F", ndmin=2)
        if arr.dtype not in ELEM_KINDS.values():
            arr = arr.astype(np.float64, order="F")
        return cls.wrap(arr)

    @classmethod
    def wrap(cls, arr: np.ndarray) -> "MatrixBuffer":
        """Adopt a Fortran-ordered 2-D array without copying."""
        if arr.ndim != 2:
            raise ShapeError(f"expected a 2-D array, got {arr.ndim}-D")
        if not arr.flags.f_contiguous:
            raise ValueError("storage must be column-major (Fortran-contiguous)")
        rows, cols = arr.shape
        return cls(rows, cols, elem_kind_of(arr.dtype), arr.reshape(-1, order="F"))

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def array(self) -> np.ndarray:
        return self.data.reshape((self.rows, self.cols), order="F")

    def view(self) -> "MatrixView":
        return MatrixView(self, 0, 0, self.rows, self.cols)

    def __repr__(self):
        return f"MatrixBuffer({self.rows}x{self.cols}, {self.elem_kind})"


@dataclass(frozen=True)
class MatrixView:
    """A rectangular window ``[row_offset:+rows, col_offset:+cols]`` of a buffer."""

    origin: MatrixBuffer = field(repr=False)
    row_offset: int
    col_offset: int
    rows: int
    cols: int

    def __post_init__(self):
        if min(self.row_offset, self.col_offset, self.rows, self.cols) < 0:
            raise BoundsError("negative offset or extent")
        if (self.row_offset + self.rows > self.origin.rows
                or self.col_offset + self.cols > self.origin.cols):
            raise BoundsError(
                f"window [{self.row_offset}:+{self.rows}, {self.col_offset}:+{self.cols}]"
                f" exceeds {self.origin.rows}x{self.origin.cols} buffer")

    @property
    def leading_dim(self) -> int:
        return self.origin.rows

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def dtype(self) -> np.dtype:
        return self.origin.dtype

    @property
    def elem_kind(self) -> str:
        return self.origin.elem_kind

    @property
    def array(self) -> np.ndarray:
        """Writable numpy view of the window (shares memory with the buffer)."""
        r, c = self.row_offset, self.col_offset
        return self.origin.array[r:r + self.rows, c:c + self.cols]

    def copy(self) -> MatrixBuffer:
        return MatrixBuffer.wrap(np.array(self.array, order="F"))

    def disjoint(self, other: "MatrixView") -> bool:
        if self.origin is not other.origin:
            return not np.may_share_memory(self.array, other.array)
        if 0 in (self.rows, self.cols, other.rows, other.cols):
            return True
        return (self.row_offset + self.rows <= other.row_offset
                or other.row_offset + other.rows <= self.row_offset
                or self.col_offset + self.cols <= other.col_offset
                or other.col_offset + other.cols <= self.col_offset)


MatrixLike = Union[MatrixView, MatrixBuffer, np.ndarray]


def as_view(m: MatrixLike) -> MatrixView:
    """Coerce a buffer or a Fortran-ordered ndarray into a full view."""
    if isinstance(m, MatrixView):
        return m
    if isinstance(m, MatrixBuffer):
        return m.view()
    if isinstance(m, np.ndarray):
        return MatrixBuffer.wrap(m).view()
    raise TypeError(f"cannot view {type(m).__name__} as a matrix")


def subview(m: MatrixLike, r0: int, c0: int, nr: int, nc: int) -> MatrixView:
    m = as_view(m)
    if min(r0, c0, nr, nc) < 0 or r0 + nr > m.rows or c0 + nc > m.cols:
        raise BoundsError(
            f"subview [{r0}:+{nr}, {c0}:+{nc}] outside {m.rows}x{m.cols} view")
    return MatrixView(m.origin, m.row_offset + r0, m.col_offset + c0, nr, nc)


def split_half(n: int) -> int:
    if n < 2:
        raise SplitError(f"cannot split dimension {n}")
    return n // 2


@lru_cache(maxsize=None)
def _executor(width: int) -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=width, thread_name_prefix="rectri")


@dataclass(frozen=True)
class Backend:
    """Execution backend: worker count and GEMM tiling ``(mc, kc, nc)``."""

    name: str = "seq"
    parallel_width: int = 1
    block_sizes: tuple[int, int, int] = (64, 64, 64)

    def __post_init__(self):
        if self.parallel_width < 1:
            raise ValueError("parallel_width must be >= 1")
        if len(self.block_sizes) != 3 or min(self.block_sizes) < 1:
            raise ValueError("block sizes must be three positive integers")

    def for_column_ranges(self, fn: Callable[[int, int], None], ncols: int,
                          align: int = 1) -> None:
        """Run ``fn(j0, j1)`` over disjoint column ranges covering ``[0, ncols)``.

        Ranges start on multiples of ``align``.  Returns once every range is done.
        """
        if ncols == 0:
            return
        nchunks = -(-ncols // align)
        width = min(self.parallel_width, nchunks)
        if width == 1:
            fn(0, ncols)
            return
        per = -(-nchunks // width) * align
        bounds = [(j, min(j + per, ncols)) for j in range(0, ncols, per)]
        futures = [_executor(self.parallel_width).submit(fn, j0, j1) for j0, j1 in bounds]
        for f in futures:
            f.result()


SEQUENTIAL = Backend("seq", 1)


def parallel_backend(width: int | None = None, block_sizes=(64, 64, 64)) -> Backend:
    return Backend("par", width or os.cpu_count() or 1, tuple(block_sizes))


def get_backend(name: str) -> Backend:
    if name == "seq":
        return SEQUENTIAL
    if name == "par":
        return parallel_backend()
    raise ValueError(f"unknown backend {name!r}")


def gemm(alpha: float, trans_a: bool, A: MatrixLike, B: MatrixLike, beta: float,
         C: MatrixLike, backend: Backend = SEQUENTIAL, *, trans_b: bool = False) -> None:
    """``C <- alpha * op(A) @ op(B) + beta * C`` in place.

    Blocked over (nc, kc, mc) with packed panels; output columns are split
    across the backend's workers so each worker owns disjoint columns of C.
    ``beta == 0`` overwrites C without reading it, as in BLAS.
    """
    A, B, C = as_view(A), as_view(B), as_view(C)
    if not (A.dtype == B.dtype == C.dtype):
        raise TypeError("gemm operands must share one element type")
    a = A.array.T if trans_a else A.array
    b = B.array.T if trans_b else B.array
    c = C.array
    M, K = a.shape
    if b.shape[0] != K or c.shape != (M, b.shape[1]):
        raise ShapeError(f"gemm shapes op(A)={a.shape} op(B)={b.shape} C={c.shape}")
    if not (C.disjoint(A) and C.disjoint(B)):
        raise AliasingError("gemm output overlaps an input")
    N = c.shape[1]

    if beta == 0:
        c[...] = 0
    elif beta != 1:
        c *= beta
    if alpha == 0 or K == 0 or M == 0:
        return

    mc, kc, nc = backend.block_sizes

    def work(j0: int, j1: int) -> None:
        for jc in range(j0, j1, nc):
            je = min(jc + nc, j1)
            for pc in range(0, K, kc):
                pe = min(pc + kc, K)
                bp = np.ascontiguousarray(b[pc:pe, jc:je])
                for ic in range(0, M, mc):
                    ie = min(ic + mc, M)
                    prod = np.ascontiguousarray(a[ic:ie, pc:pe]) @ bp
                    if alpha != 1:
                        prod *= alpha
                    c[ic:ie, jc:je] += prod

    backend.for_column_ranges(work, N, align=nc)


def scale(alpha: float, B: MatrixLike) -> None:
    b = as_view(B).array
    if alpha != 1:
        b *= alpha
