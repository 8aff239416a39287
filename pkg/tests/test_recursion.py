import numpy as np
import pytest

from rectri import (
    AliasingError,
    Backend,
    CallCounter,
    MatrixBuffer,
    OpKind,
    ShapeError,
    Side,
    SingularMatrixError,
    TriangularSpec,
    rec_trmm,
    rec_trsm,
    schema_for,
    subview,
)
from rectri.oracle import oracle_trmm, relative_residual
from rectri.variants import all_variants
from conftest import fortran, rhs, ulp, well_conditioned

VARIANTS = list(all_variants())


def test_trmm_identity_full_depth(rng):
    B = fortran(rng.standard_normal((4, 3)))
    out = B.copy(order="F")
    counter = CallCounter()
    rec_trmm(TriangularSpec("left", "lower", "t"), fortran(np.eye(4)), out, threshold=2, counter=counter)
    np.testing.assert_array_equal(out, B)
    assert counter["base_trmm"] == 2 and counter["gemm"] == 1


def test_trmm_single_split():
    spec = TriangularSpec("left", "lower", "t")
    out = fortran([[1], [1]])
    rec_trmm(spec, fortran([[2, 0], [3, 4]]), out, threshold=1)
    np.testing.assert_array_equal(out, [[5], [4]])


def test_trmm_right_upper():
    out = fortran([[1, 1]])
    rec_trmm(TriangularSpec("right", "upper"), fortran([[1, 1], [0, 1]]), out, threshold=1)
    np.testing.assert_array_equal(out, [[1, 2]])


def test_trsm_identity(rng):
    B = fortran(rng.standard_normal((8, 5)))
    X = B.copy(order="F")
    rec_trsm(TriangularSpec(), fortran(np.eye(8)), X, threshold=2)
    np.testing.assert_array_equal(X, B)


def test_trsm_single_split():
    X = fortran([[2], [6]])
    rec_trsm(TriangularSpec(), fortran([[2, 0], [1, 4]]), X, threshold=1)
    np.testing.assert_array_equal(X, [[1], [1.25]])


@pytest.mark.parametrize("spec", VARIANTS, ids=lambda s: s.variant)
def test_round_trip(spec, rng):
    n = 37
    A = well_conditioned(n, rng)
    B = rhs(spec, n, 6, rng)
    X = B.copy(order="F")
    rec_trsm(spec, A, X, threshold=4)
    rec_trmm(spec, A, X, threshold=4)
    scale_ = np.abs(A).sum(axis=1).max() * np.abs(B).sum(axis=1).max()
    assert np.abs(X - B).max() <= 64 * n * ulp(np.float64) * scale_


def test_schema_trsm_left_lower_n():
    s = schema_for("trsm", TriangularSpec("left", "lower", "n"))
    assert (s.first, s.second) == ("A11", "A22")
    u = s.update
    assert (u.block, u.trans, u.source, u.target, u.sign) == ("A21", False, 1, 2, -1.0)
    assert s.describe() == "A11 first; B2 <- B2 - A21*B1; A22 second"


def test_schema_trmm_left_lower_t():
    s = schema_for(OpKind.TRMM, TriangularSpec("left", "lower", "t"))
    assert s.describe() == "A11 first; B1 <- B1 + A21^T*B2; A22 second"


def test_schema_trmm_left_lower_n_goes_bottom_up(rng):
    spec = TriangularSpec("left", "lower", "n")
    s = schema_for("trmm", spec)
    assert s.describe() == "A22 first; B2 <- B2 + A21*B1; A11 second"
    A, B = well_conditioned(6, rng), rhs(spec, 6, 2, rng)
    out = B.copy(order="F")
    rec_trmm(spec, A, out, threshold=1)
    np.testing.assert_allclose(out, oracle_trmm(spec, A, B), rtol=0, atol=1e-14)


def test_schema_table_is_total():
    seen = set()
    for op in OpKind:
        for spec in all_variants(include_conj=True):
            s = schema_for(op, spec)
            assert {s.first, s.second} == {"A11", "A22"}
            assert s.update.block == ("A21" if spec.uplo.value == "lower" else "A12")
            assert s.update.sign == (-1.0 if op is OpKind.TRSM else 1.0)
            seen.add((op, spec.variant))
    assert len(seen) == 48


@pytest.mark.parametrize("k", range(0, 6))
@pytest.mark.parametrize("op", [rec_trmm, rec_trsm])
def test_gemm_call_count(k, op, rng):
    threshold = 3
    n = 2 ** k * threshold
    spec = TriangularSpec("right", "upper", "t")
    counter = CallCounter()
    op(spec, well_conditioned(n, rng), rhs(spec, n, 2, rng), threshold=threshold, counter=counter)
    base = "base_trmm" if op is rec_trmm else "base_trsm"
    assert counter["gemm"] == 2 ** k - 1
    assert counter[base] == 2 ** k


@pytest.mark.parametrize("n, threshold", [(17, 1), (100, 3), (257, 16), (1000, 7)])
def test_recursion_depth_bound(n, threshold, rng):
    counter = CallCounter()
    rec_trsm(TriangularSpec(), np.asfortranarray(np.eye(n)), fortran(np.ones((n, 1))),
             threshold=threshold, counter=counter)
    sizes = [c[1] for c in counter.calls if c[0] == "base_trsm"]
    assert sum(sizes) == n
    depth = int(np.ceil(np.log2(n / threshold))) + 1
    # floor splits shrink by at least half per level
    assert max(sizes) <= threshold and min(sizes) >= n // 2 ** (depth - 1) // 2


@pytest.mark.parametrize("spec", VARIANTS, ids=lambda s: s.variant)
def test_alpha_factoring(spec, rng):
    n, alpha = 23, -2.75
    A, B = well_conditioned(n, rng), rhs(spec, n, 4, rng)
    for threshold in (1, 5, 64):
        scaled = B.copy(order="F")
        rec_trmm(spec.with_alpha(alpha), A, scaled, threshold=threshold)
        ref = B.copy(order="F")
        rec_trmm(spec, A, ref, threshold=threshold)
        ref *= alpha
        assert np.all(np.abs(scaled - ref) <= 4 * ulp(np.float64) * np.abs(ref))

        solved = B.copy(order="F")
        rec_trsm(spec.with_alpha(alpha), A, solved, threshold=threshold)
        pre = B * alpha
        pre = np.asfortranarray(pre)
        rec_trsm(spec, A, pre, threshold=threshold)
        np.testing.assert_array_equal(solved, pre)


@pytest.mark.parametrize("spec", [s for s in VARIANTS if s.side is Side.RIGHT],
                         ids=lambda s: s.variant)
def test_right_left_duality(spec, rng):
    left = TriangularSpec("left", spec.uplo, "t" if spec.trans.value == "n" else "n", spec.diag)
    n = 19
    A, B = well_conditioned(n, rng), rhs(spec, n, 5, rng)
    for op in (rec_trmm, rec_trsm):
        right_out = B.copy(order="F")
        op(spec, A, right_out, threshold=4)
        left_out = np.asfortranarray(B.T)
        op(left, A, left_out, threshold=4)
        np.testing.assert_allclose(right_out, left_out.T, rtol=0, atol=64 * n * ulp(np.float64))


@pytest.mark.parametrize("row", [0, 3, 7, 8, 12, 15])
@pytest.mark.parametrize("uplo", ["lower", "upper"])
def test_singular_index_is_global(row, uplo):
    A = np.eye(16) * 2
    A[row, row] = 0
    with pytest.raises(SingularMatrixError) as err:
        rec_trsm(TriangularSpec("left", uplo), fortran(A), fortran(np.ones((16, 2))), threshold=2)
    assert err.value.index == row


def test_errors(rng):
    with pytest.raises(ShapeError):
        rec_trsm(TriangularSpec(), fortran(np.ones((3, 4))), fortran(np.ones((3, 1))))
    buf = MatrixBuffer.from_array(np.eye(6))
    with pytest.raises(AliasingError):
        rec_trmm(TriangularSpec(), subview(buf, 0, 0, 4, 4), subview(buf, 2, 2, 4, 1))
    with pytest.raises(ValueError):
        rec_trmm(TriangularSpec(), fortran(np.eye(2)), fortran(np.ones((2, 1))), threshold=0)


def test_works_on_subviews(rng):
    """A and B living as windows of larger buffers, as in a caller's blocked code."""
    spec = TriangularSpec("left", "upper", "n")
    big_a = MatrixBuffer.from_array(rng.standard_normal((30, 30)))
    big_a.array[5:25, 5:25] = well_conditioned(20, rng)
    big_b = MatrixBuffer.from_array(rng.standard_normal((25, 9)))
    A, B = subview(big_a, 5, 5, 20, 20), subview(big_b, 3, 2, 20, 4)
    B0 = B.array.copy()
    before = big_b.array.copy()
    rec_trsm(spec, A, B, threshold=3)
    assert relative_residual("trsm", spec, A, B0, B) <= 32 * 20 * ulp(np.float64)
    mask = np.ones_like(before, dtype=bool)
    mask[3:23, 2:6] = False
    np.testing.assert_array_equal(big_b.array[mask], before[mask])


def test_parallel_backend_agrees(rng):
    spec = TriangularSpec("left", "lower", "t", "unit")
    A, B = well_conditioned(150, rng, np.float32), rhs(spec, 150, 70, rng, np.float32)
    outs = []
    for backend in (Backend("seq"), Backend("par", 4, (16, 16, 16))):
        X = B.copy(order="F")
        rec_trsm(spec, A, X, threshold=20, backend=backend)
        outs.append(X)
    for X in outs:
        assert relative_residual("trsm", spec, A, B, X) <= 32 * 150 * ulp(np.float32)
