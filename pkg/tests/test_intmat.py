from fractions import Fraction
from itertools import combinations
from math import gcd

import pytest
from hypothesis import given, strategies as st
import sympy

from affinekit import intmat


def small_matrix(max_rows=4, max_cols=4, bound=5):
    return st.integers(1, max_rows).flatmap(
        lambda m: st.integers(1, max_cols).flatmap(
            lambda n: st.lists(st.lists(st.integers(-bound, bound), min_size=n, max_size=n),
                               min_size=m, max_size=m)))


def determinantal_divisors(M):
    """gcd of all k x k minors, k = 1..min(m, n) (independent SNF oracle)."""
    m, n = len(M), len(M[0])
    out = []
    for k in range(1, min(m, n) + 1):
        g = 0
        for rows in combinations(range(m), k):
            for cols in combinations(range(n), k):
                g = gcd(g, int(sympy.Matrix([[M[i][j] for j in cols] for i in rows]).det()))
        out.append(g)
    return out


@given(small_matrix())
def test_snf_factorization(M):
    U, D, V = intmat.smith_normal_form(M)
    assert intmat.matmul(intmat.matmul(U, M), V) == D
    assert abs(intmat.det_int(U)) == 1 and abs(intmat.det_int(V)) == 1
    m, n = len(D), len(D[0])
    assert all(D[i][j] == 0 for i in range(m) for j in range(n) if i != j)
    diag = [D[i][i] for i in range(min(m, n))]
    nz = [d for d in diag if d]
    assert diag[:len(nz)] == nz and all(d > 0 for d in nz)
    assert all(nz[i + 1] % nz[i] == 0 for i in range(len(nz) - 1))


@given(small_matrix())
def test_snf_tracked_inverse(M):
    U, D, V, Ui = intmat.smith_normal_form(M, with_inverse=True)
    assert intmat.matmul(U, Ui) == intmat.identity(len(M))
    assert (U, D, V) == intmat.smith_normal_form(M)


@given(small_matrix(3, 3, 4))
def test_invariant_factors_match_minors(M):
    dd = determinantal_divisors(M)
    expected, prev = [], 1
    for d in dd:
        if d == 0:
            break
        expected.append(d // prev)
        prev = d
    assert intmat.invariant_factors(M) == expected


def test_snf_known():
    assert intmat.invariant_factors([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]) == [2, 6, 12]
    assert intmat.invariant_factors([[0, 0], [0, 0]]) == []


def _lattice_volume(M):
    """Product of sympy's invariant factors: covolume of the row lattice in its span."""
    from sympy.matrices.normalforms import invariant_factors
    out = 1
    for d in invariant_factors(sympy.Matrix(M)):
        out *= abs(int(d)) if d else 1
    return out


@given(small_matrix(4, 3, 6))
def test_hnf_same_row_lattice(M):
    H = intmat.hermite_normal_form(M)
    assert len(H) == intmat.rank_q(M)
    if not H:
        return
    # L(M), L(H) are both inside L(M;H) with equal rank: equal covolume means equal lattices
    both = [list(r) for r in M] + H
    assert intmat.rank_q(both) == len(H)
    assert _lattice_volume(M) == _lattice_volume(H) == _lattice_volume(both)


@given(small_matrix(3, 3, 5), st.lists(st.integers(-2, 2), min_size=9, max_size=9))
def test_hnf_basis_invariant(M, mix):
    n = len(M)
    # apply a unimodular row operation: add integer multiples of row 0 to the others
    N = [list(r) for r in M]
    for i in range(1, n):
        N[i] = [a + mix[i] * b for a, b in zip(N[i], N[0])]
    N[0], N[-1] = N[-1], N[0]
    assert intmat.hermite_normal_form(M) == intmat.hermite_normal_form(N)


@given(small_matrix(4, 4, 6))
def test_det_matches_sympy(M):
    if len(M) != len(M[0]):
        M = [row[:len(M)] + [0] * max(0, len(M) - len(row)) for row in M]
    assert intmat.det_int(M) == int(sympy.Matrix(M).det())


@given(small_matrix(3, 4, 4))
def test_nullspace(M):
    ns = intmat.nullspace_q(M, len(M[0]))
    assert len(ns) == len(M[0]) - intmat.rank_q(M)
    for v in ns:
        assert all(sum(Fraction(a) * b for a, b in zip(row, v)) == 0 for row in M)


def test_inverse_unimodular_and_errors():
    A = [[2, 1], [1, 1]]
    assert intmat.matmul(A, intmat.inverse_unimodular(A)) == intmat.identity(2)
    with pytest.raises(Exception):
        intmat.inverse_unimodular([[2, 0], [0, 1]])


def test_primitive():
    assert intmat.primitive([Fraction(-2, 3), Fraction(4, 3)]) == [1, -2]
    assert intmat.primitive([0, 0]) == [0, 0]


@given(st.lists(st.integers(-4, 4), min_size=3, max_size=3).filter(any))
def test_saturate_and_complete(v):
    K = intmat.saturate_columns([[x] for x in v])
    assert [r[0] for r in K] in (intmat.primitive(v), [-x for x in intmat.primitive(v)])
    C = intmat.complete_basis(K)
    full = [K[i] + C[i] for i in range(3)]
    assert abs(intmat.det_int(full)) == 1
