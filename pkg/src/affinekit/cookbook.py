"""Named, seeded scenarios reproducing the worked examples end to end.

Every scenario returns a JSON-ready dict that depends only on the seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import affine, atlas, cech, measure, realization, variation
from .exact import ExactVector, PeriodBasis
from .io import load_json

A_APPROX = "1.414213562373095048801688724209698078569671875376948"
B_APPROX = "3.141592653589793238462643383279502884197169399375106"


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    run: Callable[[int], dict]


REGISTRY: dict[str, Scenario] = {}


def scenario(name: str, description: str):
    def deco(fn):
        REGISTRY[name] = Scenario(name, description, fn)
        return fn
    return deco


def _group(name: str) -> affine.GroupPresentation:
    return affine.GroupPresentation.from_json(load_json(name, "group"))


@scenario("torus1-translational-rank", "standard torus group: translational rank 2, Γ^tr = Z x Z")
def _torus1(seed):
    return affine.analyze(_group("torus1")).to_json()


@scenario("torus2-translational-rank", "second torus structure: translational rank 1, Γ^tr = Z(1,0)")
def _torus2(seed):
    return affine.analyze(_group("torus2")).to_json()


@scenario("torus2-closed-form", "γ1^n γ2^m = ((n + m(m-1)/2, m), [[1,m],[0,1]]) against word products, |n|,|m| <= 4")
def _torus2_cf(seed):
    P = _group("torus2")
    bad = []
    for n in range(-4, 5):
        for m in range(-4, 5):
            word = (("g1", 1 if n > 0 else -1),) * abs(n) + (("g2", 1 if m > 0 else -1),) * abs(m)
            if P.evaluate(word) != P.closed_form.evaluate((n, m)):
                bad.append([n, m])
    return {"checked": 81, "mismatches": bad,
            "enumeration_mismatches": len(affine.closed_form_mismatches(P, 4))}


@scenario("z2z2-isotropy", "isotropy of the free product Z2*Z2 on R at n/2 and at 1/3")
def _z2z2_iso(seed):
    P = _group("z2z2")
    out = {}
    for x in ("0", "1/2", "1", "3/2", "1/3"):
        out[x] = [affine.word_str(w.word) for w in affine.isotropy(P, ExactVector.of([x]))]
    return out


@scenario("z2z2-translational-part", "Z2*Z2 on R: generator-level and word-level translational parts")
def _z2z2_tr(seed):
    return affine.analyze(_group("z2z2")).to_json()


@scenario("monodromy-family", "N_mon and N_hol for the product family, cases (a), (b), (c) and a = 1, b = 1/2")
def _monodromy(seed):
    B = PeriodBasis.with_symbols(a=A_APPROX, b=B_APPROX)
    out = {}
    for key, sph, alls in (("a", ["a"], ["a"]), ("b", [], ["b"]), ("c", ["a"], ["a", "b"])):
        out[key] = variation.monodromy_product_family(sph, alls, basis=B).to_json()
    out["c_rational"] = variation.monodromy_product_family(["1"], ["1", "1/2"]).to_json()
    out["strong_type"] = {k: variation.strong_type_test(variation.monodromy_product_family(s, a, basis=B).N_mon, 1)
                          for k, s, a in (("a", ["a"], ["a"]), ("b", [], ["b"]))}
    return out


@scenario("torus-holonomy", "holonomy of γ1 on the standard torus and γ2 on the second torus structure")
def _holonomy(seed):
    A1 = atlas.AtlasGraph.from_json(load_json("torus1_atlas", "atlas"))
    A2 = atlas.AtlasGraph.from_json(load_json("torus2_atlas", "atlas"))
    return {"torus1_g1": atlas.holonomy(A1, atlas.EdgePath.of("U", "g1")).to_json(),
            "torus2_g2": atlas.holonomy(A2, atlas.EdgePath.of("U", "g2")).to_json(),
            "torus2_g1g2": atlas.holonomy(A2, atlas.EdgePath.of("U", "g1 g2")).to_json(),
            "cocycle_g1_g2": atlas.cocycle_check(A2, atlas.EdgePath.of("U", "g1"), atlas.EdgePath.of("U", "g2"))}


@scenario("numeric-dev-torus2", "trapezoid developing map of the γ2 loop, 10^4 samples")
def _numeric_dev(seed):
    P = atlas.torus_family(1)
    n = 10_000
    t = np.linspace(0.0, 1.0, n + 1)
    pts = np.stack([np.zeros_like(t), t], axis=1)
    pts[-1] = [0.0, 0.0]
    vel = np.tile([0.0, 1.0], (n + 1, 1))
    vel[-1] = [-1.0, 1.0]
    charts = ["e"] * n + ["g2"]
    d = atlas.numeric_dev(P, t, pts, vel, charts)
    return {"numeric_dev": d.tolist(), "exact_dev": [0, 1], "error": float(np.max(np.abs(d - [0, 1])))}


@scenario("pi1-action", "action of loops on (ω0, c): a translation and the unipotent matrix [[1,1],[0,1]]")
def _pi1(seed):
    L1 = variation.LeafModel.of([[1, 0]], ["0", "0"])
    L2 = variation.LeafModel.of([[1, 0], [0, 1]])
    t = variation.pi1_action(L1, affine.AffineElement.of(["1"]))
    u = variation.pi1_action(L2, affine.AffineElement.of(["0", "0"], [[1, 1], [0, 1]]))
    return {"translation": t.to_json(), "unipotent": u.to_json()}


@scenario("variation-decomposition", "zero, full and mixed variation")
def _decomp(seed):
    cases = {"zero": [[0, 0], [0, 0]], "full": [[1, 0], [0, 1]], "mixed": [[1, 0], [2, 0]]}
    return {k: variation.variation_decomposition(variation.LeafModel.of(c)).to_json() for k, c in cases.items()}


@scenario("reeb-curvature", "constant curvature -1 on the Reeb example and its raw coordinate integral")
def _reeb(seed):
    return variation.reeb_example()


@scenario("su2-coadjoint", "KKS areas of coadjoint spheres r in {0.5, 1, 2, 3}, mesh 256")
def _su2(seed):
    out = {}
    for r in (0.5, 1.0, 2.0, 3.0):
        a = variation.coadjoint_su2_area(r, 256)
        out[str(r)] = {"area": a, "area_over_r": a / r, "relative_error": abs(a / (4 * math.pi * r) - 1)}
    return out


@scenario("compactness-classification", "compactness types of linear local models")
def _compact(seed):
    out = {}
    for flags in ((True, True, True), (False, True, False), (True, False, True)):
        out[",".join(map(str, flags))] = sorted(affine.classify_linear_model(*flags))
    return out


@scenario("period-lattices", "period lattices: oscillator, two oscillators, rescaled oscillator")
def _periods(seed):
    out = {}
    for key, sys, b in (("oscillator", realization.builtin("oscillator"), [1.0]),
                        ("oscillator2", realization.builtin("oscillator2"), [1.0, 1.0]),
                        ("oscillator_2H", realization.builtin("oscillator", 2.0), [2.0])):
        out[key] = realization.period_lattice(sys, b, seed=seed).to_json()
    return out


@scenario("dh-circle-c2", "DH density of the circle action on C^2 (10^6 samples) and its polynomial degree")
def _dh(seed):
    h = measure.s1_on_c2(1_000_000, seed)
    f1, f0 = measure.polynomial_fit(h, 1), measure.polynomial_fit(h, 0)
    return {"histogram": h.to_json(), "fit_degree1": f1.to_json(), "fit_degree0": f0.to_json(),
            "slope_relative_error": abs(f1.coefficients[1] / (4 * math.pi ** 2) - 1)}


@scenario("dh-torus-c2", "DH density of the torus action on C^2 (10^6 samples): constant 4π^2")
def _dh_t2(seed):
    h = measure.t2_on_c2(1_000_000, seed)
    d = h.densities / (4 * math.pi ** 2)
    return {"density_over_4pi2": d.tolist(), "max_deviation": float(np.max(np.abs(d - 1)))}


@scenario("fubini-sphere-interval", "Fubini identity on S^2 x [0,1] with f = z^2 (10^5 samples)")
def _fubini(seed):
    return measure.fubini_check(lambda x, y, z, b: z * z, samples=100_000, seed=seed).to_json()


@scenario("weyl-su2", "Weyl integration on su(2) with f = exp(-|x|^2) (10^6 samples)")
def _weyl(seed):
    return measure.weyl_su2_check("gaussian", 1_000_000, seed).to_json()


@scenario("pair-groupoid-mass", "Liouville mass of S^2 x S^2 for areas 1 and 4π")
def _pair(seed):
    out = {}
    for key, A in (("1", 1.0), ("4pi", 4 * math.pi)):
        e = measure.pair_groupoid_mass(A, 100_000, seed)
        out[key] = dict(e.to_json(), expected=A * A, relative_error=abs(e.value / (A * A) - 1))
    return out


def _nerve_system(name: str):
    data = load_json(name, "nerve")
    N = cech.Nerve.from_json(data)
    return N, cech.LocalSystem.from_json(N, data)


@scenario("cech-torus", "integral cohomology of the seven-vertex torus")
def _cech_torus(seed):
    N, S = _nerve_system("torus7_nerve")
    return {str(p): cech.cohomology(N, S, p).to_json() for p in range(3)}


@scenario("cech-twisted-circle", "circle with rank-2 monodromy [[1,1],[0,1]]")
def _cech_twisted(seed):
    N, S = _nerve_system("twisted_circle_nerve")
    return {str(p): cech.cohomology(N, S, p).to_json() for p in range(2)}


@scenario("dd-half-cocycle", "1/2 on one triangle of the tetrahedron boundary: a cocycle that is not trivial")
def _dd_half(seed):
    N, S = _nerve_system("boundary_tetra_nerve")
    c = cech.Cochain.from_mapping(N, 2, {("v0", "v1", "v2"): Fraction(1, 2)}, ring="T", default=0)
    lam = cech.dd_trivialize(c, S)
    return {"cocycle": cech.dd_cocycle_check(c, S), "trivializable": lam is not None,
            "class": [str(x) for x in cech.dd_class(c, S)]}


@scenario("chern-torus", "Chern class of torus transition data winding once on the seven-vertex torus")
def _chern(seed):
    N, S = _nerve_system("torus7_nerve")
    # a single unit winding on one triangle; the sign is chosen so the class is
    # +1 in the Hermite basis of H^2 that integral_class reports
    t0 = N.simplices[2][0]
    lift = cech.TransitionLift(cech.Cochain.zero(N, 1, ring="R"), {(t0[1:], t0): (-1,)})
    return {"class": cech.chern_class(lift, S).to_json(), "doubled": cech.chern_class(lift.scale(2), S).to_json()}


def names() -> list[str]:
    return sorted(REGISTRY)


def run(name: str, seed: int = 0) -> dict:
    try:
        sc = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; see `affinekit cookbook list`") from None
    return {"scenario": name, "seed": seed, "result": sc.run(seed)}
