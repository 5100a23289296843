import math
from fractions import Fraction

import numpy as np
import pytest

from affinekit import affine, kernels, variation
from affinekit.affine import AffineElement
from affinekit.exact import DimMismatch, ExactVector, PeriodBasis
from affinekit.io import load_json
from affinekit.variation import LeafModel, SubsetViolation

A_APPROX = "1.414213562373095048801688724209698078569671875376948"
B_APPROX = "3.141592653589793238462643383279502884197169399375106"

UNI = {1: [[[1]], [[-1]]],
       2: [[[1, 0], [0, 1]], [[1, 1], [0, 1]], [[0, 1], [1, 0]], [[2, 1], [1, 1]], [[1, 0], [-3, 1]], [[0, -1], [1, 0]]],
       3: [[[1, 0, 0], [0, 1, 0], [0, 0, 1]], [[1, 1, 0], [0, 1, 0], [0, 0, 1]], [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
           [[1, 0, 0], [2, 1, 0], [-1, 3, 1]], [[-1, 0, 0], [0, 1, 2], [0, 0, 1]]]}


def rand_frac(rng, bound=3):
    return str(Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, 4))))


def random_triple(rng):
    q, h = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    chern = rng.integers(-3, 4, size=(q, h)).tolist()
    L = LeafModel.of(chern, [rand_frac(rng) for _ in range(h)])
    g = AffineElement.of([rand_frac(rng) for _ in range(q)], UNI[q][int(rng.integers(len(UNI[q])))])
    d = ExactVector.of([rand_frac(rng) for _ in range(q)])
    return L, g, d


def test_affinity_and_equivariance_random():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        L, g, d = random_triple(rng)
        e = ExactVector.of([rand_frac(rng) for _ in range(L.transverse_dim)])
        # affine in dev: var(d + e) - var(d) - var(e) + ω0 = 0
        lhs = variation.variation_along(L, d + e) - variation.variation_along(L, d) \
            - variation.variation_along(L, e) + L.omega0
        assert lhs.is_zero()
        # equivariance: var(g·L, d) = var(L, g·d)
        gL = variation.pi1_action(L, g)
        assert variation.variation_along(gL, d) == variation.variation_along(L, affine.act(g, d))
        # the action composes: g·(k·L) = (k∘g)·L
        q = L.transverse_dim
        k = AffineElement.of([rand_frac(rng) for _ in range(q)], UNI[q][int(rng.integers(len(UNI[q])))])
        assert variation.pi1_action(variation.pi1_action(L, k), g) == variation.pi1_action(L, affine.compose(k, g))
        # float path agrees with the exact one
        np.testing.assert_allclose(variation.variation_along_float(L, d.to_float()),
                                   variation.variation_along(L, d).to_float(), atol=1e-12)


def test_pi1_action_examples():
    L = LeafModel.of([[1, 0], [0, 1]])
    u = variation.pi1_action(L, AffineElement.of(["0", "0"], [[1, 1], [0, 1]]))
    assert u.chern == ((1, 0), (1, 1))
    t = variation.pi1_action(LeafModel.of([[1, 0]], ["0", "0"]), AffineElement.of(["1"]))
    assert t.omega0.rational_entries() == (1, 0)


def test_decomposition_flags():
    zero = variation.variation_decomposition(LeafModel.of([[0, 0], [0, 0]]))
    assert zero.zero_variation and not zero.full_variation and len(zero.kernel_basis) == 2
    full = variation.variation_decomposition(LeafModel.of([[1, 0], [0, 1]]))
    assert full.full_variation and not full.zero_variation and full.kernel_basis == ()
    mixed = variation.variation_decomposition(LeafModel.of([[1, 0], [2, 0]]))
    assert mixed.kernel_basis == ((2, -1),)
    assert not mixed.full_variation and not mixed.zero_variation


def test_leaf_json_and_errors():
    L = LeafModel.from_json(load_json("leaf_q2", "leaf"))
    assert LeafModel.from_json(L.to_json()) == L
    with pytest.raises(DimMismatch):
        variation.variation_along(L, ["1"])
    with pytest.raises(DimMismatch):
        LeafModel.of([[1, 0], [1]])


def test_symplectic_cone():
    L = LeafModel.of([[1, 0]], ["1", "1"], positive_classes=[[1, 0], [0, 1]])
    assert variation.in_symplectic_cone(L, variation.variation_along(L, ["0"]))
    assert not variation.in_symplectic_cone(L, variation.variation_along(L, ["-2"]))


def _basis():
    return PeriodBasis.with_symbols(a=A_APPROX, b=B_APPROX)


def test_monodromy_case_a():
    r = variation.monodromy_product_family(["a"], ["a"], basis=_basis())
    assert r.mon_verdict.discrete and r.hol_verdict.discrete
    assert [str(v[0]) for v in r.mon_verdict.basis] == ["a"] == [str(v[0]) for v in r.hol_verdict.basis]


def test_monodromy_case_b():
    r = variation.monodromy_product_family([], ["b"], basis=_basis())
    assert r.mon_verdict.discrete and r.mon_verdict.rank == 0
    assert [str(v[0]) for v in r.hol_verdict.basis] == ["b"]


def test_monodromy_case_c():
    r = variation.monodromy_product_family(["a"], ["a", "b"], basis=_basis())
    assert [str(v[0]) for v in r.mon_verdict.basis] == ["a"]
    assert not r.hol_verdict.discrete
    assert any("asserted" in n for n in r.notes)
    rat = variation.monodromy_product_family(["1"], ["1", "1/2"])
    assert rat.hol_verdict.discrete and rat.index.index == 2


def test_monodromy_subset_violation():
    with pytest.raises(SubsetViolation):
        variation.monodromy_product_family(["1"], ["1/2"])
    with pytest.raises(SubsetViolation):
        variation.monodromy_product_family(["1"], ["1", "1/2"], intermediate=["1/3"])


def test_strong_type():
    from affinekit.lattice import ClosedSubgroup
    assert variation.strong_type_test(ClosedSubgroup.of(1, [["2"]]), 1)
    assert not variation.strong_type_test(ClosedSubgroup.of(1, []), 1)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 3.0])
def test_coadjoint_area(r):
    a = variation.coadjoint_su2_area(r, 256)
    assert abs(a / (4 * math.pi * r) - 1) < 1e-3


def test_coadjoint_linearity_and_convergence():
    ratios = [variation.coadjoint_su2_area(r, 256) / r for r in (0.5, 1.0, 2.0, 3.0)]
    assert max(ratios) / min(ratios) - 1 < 1e-3
    e1 = abs(variation.coadjoint_su2_area(1.0, 32) - 4 * math.pi)
    e2 = abs(variation.coadjoint_su2_area(1.0, 64) - 4 * math.pi)
    assert 3.5 < e1 / e2 < 4.5
    with pytest.raises(ValueError):
        variation.coadjoint_su2_area(-1.0)


@pytest.mark.skipif(not kernels.HAS_NUMBA, reason="numba unavailable")
def test_kks_backends_agree():
    assert variation.coadjoint_su2_area(1.7, 128, "numpy") == pytest.approx(
        variation.coadjoint_su2_area(1.7, 128, "numba"), rel=1e-12)


def test_reeb_example():
    out = variation.reeb_example()
    assert out["curvature_constant"] == -1.0
    assert out["raw_integral"] == pytest.approx(-2 * math.pi, rel=1e-12)


def test_curvature_pairing_and_grid_checks():
    s = variation.CurvatureSample.from_function(lambda x, y: np.sin(x) ** 2, (0, 2 * math.pi), (0, 1), 64, 8)
    assert variation.curvature_pairing(s) == pytest.approx(math.pi, rel=1e-12)
    with pytest.raises(variation.InconsistentGrid):
        variation.CurvatureSample((0, 1), (0, 1), np.ones((2, 2)), periods=(2.0, 1.0))
    with pytest.raises(variation.InconsistentGrid):
        variation.CurvatureSample((0, 1), (0, 1), np.array([[np.nan]]))
