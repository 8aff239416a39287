"""TRMM/TRSM problem descriptors.

A :class:`TriangularSpec` carries the four BLAS flags plus the scalar alpha:

* Left:  ``B <- alpha op(A) B``  /  solve ``op(A) X = alpha B``
* Right: ``B <- alpha B op(A)``  /  solve ``X op(A) = alpha B``

Results always overwrite B in place.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, replace


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class Uplo(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"


class Trans(enum.Enum):
    N = "n"
    T = "t"
    C = "c"


class Diag(enum.Enum):
    NONUNIT = "nonunit"
    UNIT = "unit"


class OpKind(enum.Enum):
    TRMM = "trmm"
    TRSM = "trsm"


@dataclass(frozen=True)
class TriangularSpec:
    side: Side = Side.LEFT
    uplo: Uplo = Uplo.LOWER
    trans: Trans = Trans.N
    diag: Diag = Diag.NONUNIT
    alpha: float = 1.0

    def __post_init__(self):
        # accept the CLI spellings as well as enum members
        object.__setattr__(self, "side", Side(self.side))
        object.__setattr__(self, "uplo", Uplo(self.uplo))
        object.__setattr__(self, "trans", Trans(self.trans))
        object.__setattr__(self, "diag", Diag(self.diag))
        if not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be finite, got {self.alpha}")

    @property
    def transposed(self) -> bool:
        return self.trans is not Trans.N

    @property
    def unit(self) -> bool:
        return self.diag is Diag.UNIT

    @property
    def op_lower(self) -> bool:
        """Whether op(A) is lower triangular."""
        return (self.uplo is Uplo.LOWER) != self.transposed

    def with_alpha(self, alpha: float) -> "TriangularSpec":
        return replace(self, alpha=alpha)

    @property
    def variant(self) -> str:
        return "_".join(f.value for f in (self.side, self.uplo, self.trans, self.diag))

    @classmethod
    def parse(cls, variant: str, alpha: float = 1.0) -> "TriangularSpec":
        side, uplo, trans, diag = variant.split("_")
        return cls(side, uplo, trans, diag, alpha)


def effective_op(spec: "TriangularSpec | Trans", elem_kind: str = "f64") -> Trans:
    """Reduce ConjTrans to Trans on real element kinds."""
    trans = spec.trans if isinstance(spec, TriangularSpec) else Trans(spec)
    if trans is Trans.C and elem_kind in ("f32", "f64"):
        return Trans.T
    return trans


def all_variants(alpha: float = 1.0, include_conj: bool = False):
    """Every flag combination; 16 unless ConjTrans is listed separately."""
    transes = list(Trans) if include_conj else [Trans.N, Trans.T]
    for side, uplo, trans, diag in itertools.product(Side, Uplo, transes, Diag):
        yield TriangularSpec(side, uplo, trans, diag, alpha)
