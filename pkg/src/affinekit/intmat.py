"""Integer and rational matrix routines on plain nested lists.

Everything here uses Python ints and Fractions, so there is no overflow no
matter how large the intermediate entries get.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence

Matrix = list[list]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def copy(M) -> Matrix:
    return [list(r) for r in M]


def shape(M) -> tuple[int, int]:
    m = len(M)
    return m, (len(M[0]) if m else 0)


def matmul(A, B) -> Matrix:
    n = len(B)
    p = len(B[0]) if n else 0
    return [[sum((a[k] * B[k][j] for k in range(n)), 0) for j in range(p)] for a in A]


def transpose(M) -> Matrix:
    return [list(c) for c in zip(*M)] if M else []


def matvec(A, v) -> list:
    return [sum((a * x for a, x in zip(row, v)), 0) for row in A]


def smith_normal_form(M: Sequence[Sequence[int]], with_inverse: bool = False):
    """Return ``(U, D, V)`` with ``U @ M @ V == D``.

    U and V are unimodular; D is diagonal with non-negative entries
    d1 | d2 | ... (zeros last). With ``with_inverse`` the result is
    ``(U, D, V, U^-1)``; the inverse is tracked through the row operations.
    """
    D = [[int(x) for x in row] for row in M]
    m, n = shape(D)
    if n == 0 and m:
        n = 0
    U, V = identity(m), identity(n)
    Ui = identity(m) if with_inverse else None

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]
        if Ui is not None:
            for row in Ui:
                row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, k):  # row_dst += k * row_src
        D[dst] = [a + k * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a + k * b for a, b in zip(U[dst], U[src])]
        if Ui is not None:  # U -> E U, so U^-1 -> U^-1 E^-1
            for row in Ui:
                row[src] -= k * row[dst]

    def add_col(dst, src, k):
        for row in D:
            row[dst] += k * row[src]
        for row in V:
            row[dst] += k * row[src]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if D[i][j] and (best is None or abs(D[i][j]) < abs(D[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            for i in range(t + 1, m):
                if D[i][t]:
                    add_row(i, t, -(D[i][t] // D[t][t]))
            for j in range(t + 1, n):
                if D[t][j]:
                    add_col(j, t, -(D[t][j] // D[t][t]))
            rest = [(abs(D[i][t]), i, "r") for i in range(t + 1, m) if D[i][t]]
            rest += [(abs(D[t][j]), j, "c") for j in range(t + 1, n) if D[t][j]]
            if rest:
                _, k, kind = min(rest)
                if kind == "r":
                    swap_rows(t, k)
                else:
                    swap_cols(t, k)
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if D[i][j] % D[t][t]), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if D[t][t] < 0:
            D[t] = [-a for a in D[t]]
            U[t] = [-a for a in U[t]]
            if Ui is not None:
                for row in Ui:
                    row[t] = -row[t]
        t += 1
    return (U, D, V, Ui) if with_inverse else (U, D, V)


def invariant_factors(M) -> list[int]:
    _, D, _ = smith_normal_form(M)
    m, n = shape(D)
    return [D[i][i] for i in range(min(m, n)) if D[i][i]]


def hermite_normal_form(M: Sequence[Sequence[int]]) -> Matrix:
    """Row-style Hermite normal form with zero rows removed.

    Upper echelon, positive pivots, entries above each pivot reduced into
    ``[0, pivot)``. Two integer matrices have the same row lattice iff their
    HNFs are equal.
    """
    H = [[int(x) for x in row] for row in M]
    m, n = shape(H)
    r = 0
    for c in range(n):
        if r >= m:
            break
        while True:
            rows = [i for i in range(r, m) if H[i][c]]
            if not rows:
                break
            p = min(rows, key=lambda i: abs(H[i][c]))
            H[r], H[p] = H[p], H[r]
            done = True
            for i in range(r + 1, m):
                if H[i][c]:
                    k = H[i][c] // H[r][c]
                    H[i] = [a - k * b for a, b in zip(H[i], H[r])]
                    if H[i][c]:
                        done = False
            if done:
                break
        if r < m and H[r][c]:
            if H[r][c] < 0:
                H[r] = [-a for a in H[r]]
            for i in range(r):
                k = H[i][c] // H[r][c]
                if k:
                    H[i] = [a - k * b for a, b in zip(H[i], H[r])]
            r += 1
    return [row for row in H if any(row)]


def det_int(M) -> int:
    n = len(M)
    if n == 0:
        return 1
    R = [[Fraction(x) for x in row] for row in M]
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if R[i][c]), None)
        if p is None:
            return 0
        if p != c:
            R[c], R[p] = R[p], R[c]
            det = -det
        det *= R[c][c]
        for i in range(c + 1, n):
            if R[i][c]:
                f = R[i][c] / R[c][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[c])]
    return int(det) if det.denominator == 1 else det


def rref(M) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form over Q. Returns (R, pivot columns)."""
    R = [[Fraction(x) for x in row] for row in M]
    m, n = shape(R)
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if R[i][c]), None)
        if p is None:
            continue
        R[r], R[p] = R[p], R[r]
        piv = R[r][c]
        R[r] = [a / piv for a in R[r]]
        for i in range(m):
            if i != r and R[i][c]:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return R, pivots


def rank_q(M) -> int:
    if not M or not M[0]:
        return 0
    return len(rref(M)[1])


def nullspace_q(M, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {x : M x = 0} over Q."""
    n = ncols if ncols is not None else (len(M[0]) if M else 0)
    if not M:
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    R, piv = rref(M)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in zip(R, piv):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def solve_q(A, b) -> list[Fraction] | None:
    """One rational solution of ``A x = b`` or None."""
    m, n = shape(A)
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    R, piv = rref(aug)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for row, pc in zip(R, piv):
        x[pc] = row[n]
    return x


def inverse_q(A) -> Matrix:
    n = len(A)
    aug = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(A)]
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in R]


def inverse_unimodular(A) -> Matrix:
    inv = inverse_q(A)
    out = []
    for row in inv:
        if any(x.denominator != 1 for x in row):
            raise ValueError("matrix is not unimodular")
        out.append([int(x) for x in row])
    return out


def denominator_lcm(values) -> int:
    d = 1
    for v in values:
        d = lcm(d, Fraction(v).denominator)
    return d


def primitive(v: Sequence[Fraction]) -> list[int]:
    """Scale a rational vector to a primitive integer vector, first nonzero > 0."""
    d = denominator_lcm(v)
    ints = [int(Fraction(x) * d) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        return ints
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x)
    return [-x for x in ints] if lead < 0 else ints


def saturate_columns(B) -> Matrix:
    """Integer basis (as columns) of ``span_Q(cols of B) ∩ Z^m``."""
    m, k = shape(B)
    if k == 0:
        return [[] for _ in range(m)]
    d = denominator_lcm(x for row in B for x in row)
    Bi = [[int(Fraction(x) * d) for x in row] for row in B]
    U, D, V, Uinv = smith_normal_form(Bi, with_inverse=True)
    r = sum(1 for i in range(min(m, k)) if D[i][i])
    # B = Uinv D Vinv; the first r columns of Uinv span the saturation.
    return [row[:r] for row in Uinv]


def complete_basis(K) -> Matrix:
    """Given a saturated integer column basis K (m x p), return m x (m-p) columns
    completing it to a basis of Z^m."""
    m, p = shape(K)
    if p == 0:
        return identity(m)
    U, D, V, Uinv = smith_normal_form(K, with_inverse=True)
    if any(D[i][i] != 1 for i in range(p)):
        raise ValueError("columns are not saturated")
    return [row[p:] for row in Uinv]
