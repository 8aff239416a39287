"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Operand dimensions do not conform."""


class AliasingError(ValueError):
    """An output view overlaps one of the read-only inputs."""


class BoundsError(IndexError):
    """A requested window falls outside its parent matrix."""


class SplitError(ValueError):
    """A dimension too small to split in half."""


class TileSizeError(ValueError):
    """A base kernel was handed a tile larger than its limit."""


class SingularMatrixError(ArithmeticError):
    """Zero pivot found in a non-unit triangular solve.

    ``index`` is the row of A holding the zero diagonal entry, counted from
    the top-left corner of the matrix the caller passed in.
    """

    def __init__(self, index: int):
        self.index = int(index)
        super().__init__(f"zero diagonal entry at row {self.index}")
