import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcn_bisim.matrix import (BooleanMatrix, DimensionError, LogicalMatrix, RationalMatrix, bool_power, bool_product,
                              delta, khatri_rao, kron, power_reducing, sgn, stp, swap_matrix)


def stp_reference(A, B):
    """(A kron I_{s/n})(B kron I_{s/p}) written out with numpy only."""
    A, B = np.asarray(A), np.asarray(B)
    n, p = A.shape[1], B.shape[0]
    s = np.lcm(n, p)
    return np.kron(A, np.eye(s // n, dtype=A.dtype)) @ np.kron(B, np.eye(s // p, dtype=B.dtype))


def logical(draw, rows, cols):
    return LogicalMatrix(rows, draw(st.lists(st.integers(1, rows), min_size=cols, max_size=cols)))


@st.composite
def logical_pair(draw):
    a_rows, a_cols = draw(st.integers(1, 4)), draw(st.sampled_from([1, 2, 4, 8]))
    b_rows, b_cols = draw(st.sampled_from([1, 2, 4, 8])), draw(st.integers(1, 4))
    return logical(draw, a_rows, a_cols), logical(draw, b_rows, b_cols)


@given(logical_pair())
def test_stp_logical_matches_dense_definition(pair):
    A, B = pair
    got = stp(A, B)
    assert isinstance(got, LogicalMatrix)
    assert np.array_equal(got.to_dense(), stp_reference(A.to_dense(), B.to_dense()))


def test_stp_reduces_to_ordinary_product():
    A = np.arange(6).reshape(2, 3)
    B = np.arange(12).reshape(3, 4)
    assert np.array_equal(stp(A, B), A @ B)


def test_stp_mixed_dimensions():
    A = np.array([[1, 2, 3, 4]])
    x = np.array([[1], [0]])
    assert np.array_equal(stp(A, x), np.array([[1, 2]]))


def test_stp_vector_kron():
    # for column vectors the STP is the Kronecker product
    assert stp(delta(2, 2), delta(4, 3)) == delta(8, 7)


def test_swap_matrix_swaps_factors():
    for m, n in [(2, 3), (4, 2), (3, 3)]:
        W = swap_matrix(m, n)
        for i in range(1, m + 1):
            for j in range(1, n + 1):
                assert stp(W, stp(delta(m, i), delta(n, j))) == stp(delta(n, j), delta(m, i))


def test_swap_matrix_small():
    assert swap_matrix(2, 2).delta == [1, 3, 2, 4]


def test_power_reducing():
    for k in (1, 2, 5):
        Phi = power_reducing(k)
        for i in range(1, k + 1):
            assert stp(Phi, delta(k, i)) == stp(delta(k, i), delta(k, i))


def test_khatri_rao_columnwise_kron():
    A = LogicalMatrix(2, [1, 2, 2])
    B = LogicalMatrix(3, [3, 1, 2])
    got = khatri_rao(A, B).to_dense()
    for j in range(3):
        assert np.array_equal(got[:, j], np.kron(A.to_dense()[:, j], B.to_dense()[:, j]))


def test_khatri_rao_column_mismatch():
    with pytest.raises(DimensionError):
        khatri_rao(LogicalMatrix(2, [1]), LogicalMatrix(2, [1, 2]))


def test_kron_of_logicals():
    assert np.array_equal(kron(delta(2, 1), delta(2, 2)).to_dense(), np.kron(delta(2, 1).to_dense(),
                                                                                delta(2, 2).to_dense()))


@settings(max_examples=60)
@given(st.integers(1, 9), st.integers(1, 9), st.integers(1, 9), st.integers(0, 2 ** 32 - 1))
def test_bool_product_matches_integer_product(n, k, m, seed):
    rng = np.random.default_rng(seed)
    a = rng.random((n, k)) < 0.4
    b = rng.random((k, m)) < 0.4
    expected = (a.astype(int) @ b.astype(int)) > 0
    assert np.array_equal(bool_product(BooleanMatrix(a), BooleanMatrix(b)).data, expected)


def test_bool_product_with_logical_right_is_column_gather():
    a = BooleanMatrix(np.array([[1, 0, 1], [0, 1, 1]], dtype=bool))
    L = LogicalMatrix(3, [3, 1, 1, 2])
    assert np.array_equal(bool_product(a, L).data, a.data[:, [2, 0, 0, 1]])


def test_bool_product_dimension_error():
    with pytest.raises(DimensionError):
        bool_product(BooleanMatrix.ones(2, 3), BooleanMatrix.ones(2, 3))


def test_bool_power():
    cycle = LogicalMatrix(3, [2, 3, 1]).to_boolean()
    assert bool_power(cycle, 3) == BooleanMatrix.identity(3)
    assert bool_power(cycle, 0) == BooleanMatrix.identity(3)


def test_sgn():
    assert sgn(np.array([[0, 2], [-1, 0]])).data.tolist() == [[False, True], [True, False]]


def test_logical_text_roundtrip():
    L = LogicalMatrix(5, [2, 3, 1, 5, 5, 3, 2, 5, 2, 5])
    assert L.to_text() == "delta(5)[2 3 1 5 5 3 2 5 2 5]"
    assert LogicalMatrix.from_text(L.to_text()) == L
    assert LogicalMatrix.from_json(L.to_json()) == L


def test_logical_rejects_out_of_range():
    with pytest.raises(ValueError):
        LogicalMatrix(3, [1, 4])


def test_logical_is_immutable():
    L = LogicalMatrix(3, [1, 2])
    with pytest.raises(ValueError):
        L.index[0] = 2


def test_boolean_delta_text_with_empty_columns():
    text = "delta(8)[1 0 0 4 5 0 0 8]"
    B = BooleanMatrix.from_delta_text(text)
    assert B.to_delta_text() == text
    assert B.column_set(2) == ()
    assert not B.is_logical()


def test_boolean_json_roundtrip():
    B = BooleanMatrix.from_delta_text("delta(3)[1+2 1+3 3]")
    assert BooleanMatrix.from_json(B.to_json()) == B
    assert B.to_bitstrings() == ["110", "100", "011"]


def test_boolean_order_and_ops():
    a = BooleanMatrix.from_delta_text("delta(2)[1 2]")
    b = BooleanMatrix.ones(2, 2)
    assert a <= b and not b <= a
    assert (a | b) == b and (a & b) == a


def test_rational_matrix_reduces_and_compares():
    R = RationalMatrix(np.array([[2, 4], [6, 0]], dtype=object), 4)
    assert R == RationalMatrix(np.array([[1, 2], [3, 0]], dtype=object), 2)
    assert str(R.to_fractions()[0, 0]) == "1/2"
