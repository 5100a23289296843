from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from affinekit import affine
from affinekit.affine import AffineElement, GroupPresentation, NotUnimodular, compose, invert
from affinekit.exact import ExactVector
from affinekit.io import load_json

UNIMODULAR_2 = [[[1, 0], [0, 1]], [[1, 1], [0, 1]], [[0, 1], [1, 0]], [[2, 1], [1, 1]],
                [[-1, 0], [0, 1]], [[1, -2], [0, 1]], [[0, -1], [1, 0]], [[1, 0], [3, 1]]]

elements = st.builds(
    lambda u, A: AffineElement.of([str(x) for x in u], A),
    st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=3), min_size=2, max_size=2),
    st.sampled_from(UNIMODULAR_2))


def augmented(g: AffineElement):
    """(q+1)x(q+1) matrix [[A, u], [0, 1]] -- an independent model of Aff(R^q)."""
    q = g.dim
    u = g.u.rational_entries()
    M = sympy.zeros(q + 1, q + 1)
    for i in range(q):
        for j in range(q):
            M[i, j] = g.A[i][j]
        M[i, q] = sympy.Rational(u[i].numerator, u[i].denominator)
    M[q, q] = 1
    return M


def from_augmented(M):
    q = M.shape[0] - 1
    return AffineElement.of([str(M[i, q]) for i in range(q)], [[int(M[i, j]) for j in range(q)] for i in range(q)])


@given(elements, elements)
def test_compose_matches_matrix_model(g, h):
    assert compose(g, h) == from_augmented(augmented(g) * augmented(h))


@given(elements, elements, elements)
def test_group_axioms(g, h, k):
    e = AffineElement.identity(2)
    assert compose(compose(g, h), k) == compose(g, compose(h, k))
    assert compose(g, invert(g)) == e == compose(invert(g), g)
    assert compose(g, e) == g


@given(elements, st.integers(-4, 4))
def test_power(g, n):
    expected = AffineElement.identity(2)
    step = g if n >= 0 else invert(g)
    for _ in range(abs(n)):
        expected = compose(expected, step)
    assert affine.power(g, n) == expected


@given(elements, elements, st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=3), min_size=2, max_size=2))
def test_action_is_left(g, h, x):
    v = ExactVector.from_fractions(x)
    assert affine.act(compose(g, h), v) == affine.act(g, affine.act(h, v))


def test_not_unimodular():
    with pytest.raises(NotUnimodular):
        AffineElement.of(["0", "0"], [[2, 0], [0, 1]])


def test_word_round_trip():
    w = affine.parse_word("g1 g2^-1 g1^3")
    assert affine.word_str(w).split() == ["g1", "g2^-1", "g1", "g1", "g1"]
    assert affine.parse_word(affine.word_str(w)) == w
    assert affine.parse_word("g1^-2 g2^0") == (("g1", -1), ("g1", -1))
    assert affine.parse_word("") == ()


def _group(name):
    return GroupPresentation.from_json(load_json(name, "group"))


def test_json_round_trip():
    for name in ("torus1", "torus2", "z2z2"):
        P = _group(name)
        Q = GroupPresentation.from_json(P.to_json())
        assert [g for _, g in Q.generators] == [g for _, g in P.generators]


def test_torus1():
    a = affine.analyze(_group("torus1"))
    assert a.translational_rank == 2 and a.exhaustive
    assert [v.rational_entries() for v in a.translational_basis] == [(1, 0), (0, 1)]


def test_torus2():
    P = _group("torus2")
    a = affine.analyze(P)
    assert a.translational_rank == 1
    assert [v.rational_entries() for v in a.translational_basis] == [(1, 0)]
    assert affine.closed_form_mismatches(P, 4) == []


@pytest.mark.parametrize("n,m", [(n, m) for n in range(-4, 5) for m in range(-4, 5)])
def test_torus2_closed_form(n, m):
    P = _group("torus2")
    word = "g1^%d g2^%d" % (n, m)
    cf = P.closed_form.evaluate((n, m))
    assert P.evaluate(word) == cf
    # hand formula, kept independent of the JSON closed form
    assert cf.u.rational_entries() == (n + Fraction(m * (m - 1), 2), m)
    assert cf.A == ((1, m), (0, 1))


def test_word_ball_size_z2():
    # the Cayley ball of radius k in Z^2 has 2k^2 + 2k + 1 elements
    P = _group("torus1")
    for k in range(1, 5):
        assert len(affine.enumerate_words(P, k)) == 2 * k * k + 2 * k + 1


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_z2z2_isotropy_half_integers(n):
    P = _group("z2z2")
    x = ExactVector.of([f"{n}/2"])
    got = {w.element for w in affine.isotropy(P, x)}
    expected_word = compose(affine.power(compose(P.generator("g1"), P.generator("g2")), n - 1), P.generator("g1"))
    assert got == {AffineElement.identity(1), expected_word}


def test_z2z2_generic_point_trivial_isotropy():
    P = _group("z2z2")
    assert [w.word for w in affine.isotropy(P, ExactVector.of(["1/3"]))] == [()]


def test_z2z2_translational_part_both_ways():
    a = affine.analyze(_group("z2z2"))
    assert a.generator_translational_rank == 0
    assert a.translational_rank == 1 and a.discrepancy
    assert [v.rational_entries() for v in a.translational_basis] == [(1,)]


def test_classify_linear_model():
    assert affine.classify_linear_model(True, True, True) == frozenset(affine.COMPACTNESS_TYPES)
    assert affine.classify_linear_model(False, True, False) == frozenset()
    assert affine.classify_linear_model(True, False, False) == {"proper"}
