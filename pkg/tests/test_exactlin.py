from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from extricat.exactlin import (
    F101,
    QQ,
    FieldError,
    FieldSpec,
    Mat,
    complement_projection,
    fiber_product,
    invert,
    kernel_basis,
    rank,
    solve,
    solve_factorization,
)


def test_field_spec_rejects_composite():
    with pytest.raises(FieldError):
        FieldSpec("prime", 6)


def test_rank_empty_and_identity():
    assert rank(Mat(F101, 0, 0, [])) == 0
    assert rank(Mat.identity(F101, 3)) == 3


def test_rank_dependent_rows_over_q():
    m = Mat.from_rows(QQ, [[1, 2], [2, 4]])
    assert rank(m) == 1


def test_kernel_identity_and_zero():
    assert kernel_basis(Mat.identity(F101, 4)).cols == 0
    assert kernel_basis(Mat.zeros(F101, 2, 3)).cols == 3


def test_kernel_of_sum_over_f5():
    f5 = FieldSpec("prime", 5)
    k = kernel_basis(Mat.from_rows(f5, [[1, 1]]))
    assert k.cols == 1
    x, y = k[0, 0], k[1, 0]
    assert (x + y) % 5 == 0 and (x, y) != (0, 0)


def test_solve_factorization_examples():
    a = Mat.from_rows(QQ, [[2]])
    b = Mat.from_rows(QQ, [[1]])
    assert solve_factorization(a, b).to_rows() == [[Fraction(2)]]
    ident = Mat.identity(F101, 2)
    assert solve_factorization(ident, ident) == ident
    nonzero = Mat.from_rows(F101, [[1], [0]])
    zero = Mat.zeros(F101, 2, 1)
    assert solve_factorization(nonzero, zero) is None


def test_complement_projection_splits():
    inc = Mat.from_rows(F101, [[1, 0], [0, 1], [0, 0]])
    q, s = complement_projection(inc)
    assert (q @ inc).is_zero()
    assert q @ s == Mat.identity(F101, 1)


def test_fiber_product_dimensions():
    f = Mat.from_rows(F101, [[1, 0]])
    g = Mat.from_rows(F101, [[1]])
    fp = fiber_product(f, g)
    # pairs ((x, y), z) with x = z: dimension 2
    assert fp.cols == 2


small_mats = st.integers(min_value=0, max_value=4).flatmap(
    lambda r: st.integers(min_value=0, max_value=4).flatmap(
        lambda c: st.lists(
            st.integers(min_value=0, max_value=100), min_size=r * c, max_size=r * c
        ).map(lambda data: Mat(F101, r, c, data))
    )
)


@given(small_mats)
@settings(max_examples=60, deadline=None)
def test_rank_nullity(m):
    assert rank(m) + kernel_basis(m).cols == m.cols
    assert rank(m) <= min(m.rows, m.cols)


@given(small_mats)
@settings(max_examples=40, deadline=None)
def test_kernel_annihilates(m):
    k = kernel_basis(m)
    if k.cols:
        assert (m @ k).is_zero()


@given(small_mats, small_mats)
@settings(max_examples=40, deadline=None)
def test_solve_factorization_exactness(a, b):
    if a.rows != b.rows:
        return
    x = solve_factorization(a, b)
    if x is not None:
        assert b @ x == a


def test_invert_round_trip():
    m = Mat.from_rows(F101, [[2, 1], [1, 1]])
    inv = invert(m)
    assert inv @ m == Mat.identity(F101, 2)
    assert invert(Mat.from_rows(F101, [[1, 2], [2, 4]])) is None


def test_solve_none_when_inconsistent():
    a = Mat.from_rows(F101, [[1], [0]])
    b = Mat.from_rows(F101, [[0], [1]])
    assert solve(a, b) is None
