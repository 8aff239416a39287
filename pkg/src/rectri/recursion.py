"""Unified recursive TRMM/TRSM driver.

Each call splits A at ``mid = n // 2`` into two diagonal triangles and one
off-diagonal block, then runs three steps taken from a per-variant
:class:`RecursionSchema`: recurse on one diagonal block, apply a GEMM update
between the halves of B, recurse on the other diagonal block.  Problems of
size ``<= threshold`` go straight to a base kernel.

Step order is fixed by in-place safety: the GEMM must read a half of B that
is still in the state it needs.  For a solve that half must already be
solved; for a multiply it must still hold its original values.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Optional

from .core import SEQUENTIAL, Backend, MatrixLike, MatrixView, gemm, scale, split_half, subview
from .errors import AliasingError, SingularMatrixError
from .kernels.base import DEFAULT_TILE_LIMIT, check_operands, trmm_base, trsm_base
from .variants import OpKind, Side, TriangularSpec, Uplo

DEFAULT_THRESHOLD = 256

CounterSink = Callable[[str, int, int], None]

# op kind -> base kernel; looked up at call time so it can be swapped out
BASE_KERNELS = {OpKind.TRMM: trmm_base, OpKind.TRSM: trsm_base}


@dataclass(frozen=True)
class GemmUpdate:
    """``B[target] += sign * op(block) @ B[source]`` (Left) or ``B[source] @ op(block)`` (Right)."""

    block: str
    trans: bool
    source: int
    target: int
    sign: float
    side: Side

    def describe(self) -> str:
        op = f"{self.block}{'^T' if self.trans else ''}"
        term = f"{op}*B{self.source}" if self.side is Side.LEFT else f"B{self.source}*{op}"
        sign = "-" if self.sign < 0 else "+"
        return f"B{self.target} <- B{self.target} {sign} {term}"


@dataclass(frozen=True)
class RecursionSchema:
    op: OpKind
    first: str
    update: GemmUpdate
    second: str

    def describe(self) -> str:
        return f"{self.first} first; {self.update.describe()}; {self.second} second"


def schema_for(op: OpKind | str, spec: TriangularSpec) -> RecursionSchema:
    op = OpKind(op)
    # "forward" when the off-diagonal coupling runs from half 1 into half 2
    forward = spec.op_lower == (spec.side is Side.LEFT)
    if op is OpKind.TRSM:
        first = "A11" if forward else "A22"
        sign = -1.0
    else:
        first = "A22" if forward else "A11"
        sign = 1.0
    second = "A22" if first == "A11" else "A11"
    source, target = (1, 2) if forward else (2, 1)
    block = "A21" if spec.uplo is Uplo.LOWER else "A12"
    update = GemmUpdate(block, spec.transposed, source, target, sign, spec.side)
    return RecursionSchema(op, first, update, second)


class CallCounter(Counter):
    """Counter sink tallying events; also keeps every ``(event, n, m)`` call."""

    def __init__(self):
        super().__init__()
        self.calls: list[tuple[str, int, int]] = []

    def __call__(self, event: str, n: int, m: int) -> None:
        self[event] += 1
        self.calls.append((event, n, m))


def _rhs_count(spec: TriangularSpec, B: MatrixView) -> int:
    return B.cols if spec.side is Side.LEFT else B.rows


def _base(op: OpKind, spec, A, B, threshold, backend, sink) -> None:
    if sink is not None:
        sink(f"base_{op.value}", A.rows, _rhs_count(spec, B))
    BASE_KERNELS[op](spec, A, B, backend=backend,
                     tile_limit=max(threshold, DEFAULT_TILE_LIMIT))


def _recurse(op: OpKind, spec: TriangularSpec, A: MatrixView, B: MatrixView,
             threshold: int, backend: Backend, sink: Optional[CounterSink]) -> None:
    n = A.rows
    if n <= threshold:
        _base(op, spec, A, B, threshold, backend, sink)
        return
    mid = split_half(n)
    blocks = {
        "A11": (subview(A, 0, 0, mid, mid), 0),
        "A22": (subview(A, mid, mid, n - mid, n - mid), mid),
        "A21": (subview(A, mid, 0, n - mid, mid), None),
        "A12": (subview(A, 0, mid, mid, n - mid), None),
    }
    if spec.side is Side.LEFT:
        halves = {1: subview(B, 0, 0, mid, B.cols), 2: subview(B, mid, 0, n - mid, B.cols)}
    else:
        halves = {1: subview(B, 0, 0, B.rows, mid), 2: subview(B, 0, mid, B.rows, n - mid)}

    def triangle(name: str) -> None:
        block, offset = blocks[name]
        try:
            _recurse(op, spec, block, halves[1 if name == "A11" else 2], threshold, backend, sink)
        except SingularMatrixError as exc:
            raise SingularMatrixError(exc.index + offset) from None

    schema = schema_for(op, spec)
    up = schema.update
    triangle(schema.first)
    if sink is not None:
        sink("gemm", n, _rhs_count(spec, B))
    block = blocks[up.block][0]
    if up.side is Side.LEFT:
        gemm(up.sign, up.trans, block, halves[up.source], 1.0, halves[up.target], backend)
    else:
        gemm(up.sign, False, halves[up.source], block, 1.0, halves[up.target], backend,
             trans_b=up.trans)
    triangle(schema.second)


def _prepare(spec, A, B, threshold):
    A, B = check_operands(spec, A, B)
    if not A.disjoint(B):
        raise AliasingError("B overlaps the triangular matrix A")
    if threshold < 1:
        raise ValueError(f"threshold must be >= 1, got {threshold}")
    return A, B


def rec_trmm(spec: TriangularSpec, A: MatrixLike, B: MatrixLike,
             threshold: int = DEFAULT_THRESHOLD, backend: Backend = SEQUENTIAL,
             counter: Optional[CounterSink] = None) -> None:
    """Overwrite B with ``alpha op(A) B`` (Left) or ``alpha B op(A)`` (Right)."""
    A, B = _prepare(spec, A, B, threshold)
    if A.rows <= threshold:
        _base(OpKind.TRMM, spec, A, B, threshold, backend, counter)
        return
    _recurse(OpKind.TRMM, spec.with_alpha(1.0), A, B, threshold, backend, counter)
    scale(spec.alpha, B)


def rec_trsm(spec: TriangularSpec, A: MatrixLike, B: MatrixLike,
             threshold: int = DEFAULT_THRESHOLD, backend: Backend = SEQUENTIAL,
             counter: Optional[CounterSink] = None) -> None:
    """Overwrite B with X solving ``op(A) X = alpha B`` (Left) or ``X op(A) = alpha B`` (Right).

    Raises :class:`SingularMatrixError` naming the row of A whose diagonal is
    zero when ``spec.diag`` is non-unit.
    """
    A, B = _prepare(spec, A, B, threshold)
    if A.rows <= threshold:
        _base(OpKind.TRSM, spec, A, B, threshold, backend, counter)
        return
    scale(spec.alpha, B)
    _recurse(OpKind.TRSM, spec.with_alpha(1.0), A, B, threshold, backend, counter)
