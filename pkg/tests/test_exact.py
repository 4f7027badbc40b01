from fractions import Fraction

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from pqc.exact import (
    Q,
    SingularMatrixError,
    format_rational,
    identity,
    inertia,
    inverse,
    is_zero,
    nullspace,
    parse_rational,
    qarray,
    qeinsum,
    rank,
    solve_unique,
)

from strategies import rational_matrices, rationals


def test_coercion():
    assert Q(3) == mpq(3)
    assert Q("-6/4") == mpq(-3, 2)
    assert Q(Fraction(5, 7)) == mpq(5, 7)
    for bad in (0.5, True, None):
        with pytest.raises(TypeError):
            Q(bad)


@pytest.mark.parametrize("text", ["", "1/0", "a/2", "1.5", "1/2/3", "--1"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_rational(text)


@given(rationals)
def test_format_roundtrip(q):
    assert parse_rational(format_rational(q)) == q


def test_format_integers():
    assert format_rational(mpq(4, 2)) == "2"
    assert format_rational(mpq(-1, 3)) == "-1/3"


def test_linear_algebra():
    a = qarray([[2, 1], [1, 1]])
    assert is_zero(a @ inverse(a) - identity(2))
    assert list(solve_unique(a, qarray([3, 2]))) == [1, 1]
    sing = qarray([[1, 2], [2, 4]])
    assert rank(sing) == 1
    with pytest.raises(SingularMatrixError):
        inverse(sing)
    with pytest.raises(SingularMatrixError, match="inconsistent"):
        solve_unique(sing, qarray([1, 0]))
    with pytest.raises(SingularMatrixError, match="unique"):
        solve_unique(sing, qarray([1, 2]))
    (v,) = nullspace(sing)
    assert is_zero(sing @ v)


def test_inertia():
    assert inertia(qarray([[1, 0], [0, -1]])) == (1, 1, 0)
    assert inertia(qarray([[0, 1], [1, 0]])) == (1, 1, 0)
    assert inertia(qarray([[0, 0], [0, 3]])) == (1, 0, 1)
    with pytest.raises(ValueError):
        inertia(qarray([[0, 1], [0, 0]]))


def _loop_matmul(a, b):
    out = np.empty((a.shape[0], b.shape[1]), dtype=object)
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            out[i, j] = sum((a[i, k] * b[k, j] for k in range(a.shape[1])), mpq(0))
    return out


@given(rational_matrices(3, 4), rational_matrices(4, 2))
@settings(max_examples=50, deadline=None)
def test_qeinsum_matches_loops(a, b):
    assert is_zero(qeinsum("ik,kj->ij", a, b) - _loop_matmul(a, b))
    assert qeinsum("ij,ij->", a, a) == sum((v * v for v in a.ravel()), mpq(0))
    assert is_zero(qeinsum("ij->ji", a) - a.T)


@given(st.integers(2**40, 2**80), st.integers(1, 2**30))
@settings(max_examples=30, deadline=None)
def test_qeinsum_large_values(p, q):
    a = qarray([[mpq(p, q), mpq(-p, q + 1)], [mpq(1, 3), mpq(p)]])
    assert is_zero(qeinsum("ik,kj->ij", a, a) - _loop_matmul(a, a))
