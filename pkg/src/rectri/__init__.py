"""Recursive TRMM/TRSM built from GEMM updates and small base kernels."""

from .core import (
    SEQUENTIAL,
    Backend,
    MatrixBuffer,
    MatrixView,
    as_view,
    gemm,
    get_backend,
    parallel_backend,
    scale,
    split_half,
    subview,
)
from .errors import (
    AliasingError,
    BoundsError,
    ShapeError,
    SingularMatrixError,
    SplitError,
    TileSizeError,
)
from .recursion import CallCounter, RecursionSchema, rec_trmm, rec_trsm, schema_for
from .variants import Diag, OpKind, Side, Trans, TriangularSpec, Uplo, effective_op

__version__ = "0.1.0"
