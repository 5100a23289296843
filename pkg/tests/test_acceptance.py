"""Acceptance gate: criteria 1-11, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` (or ``python3 tests/test_acceptance.py``).
"""
import io as _io
import math
import time
from contextlib import redirect_stderr, redirect_stdout
from fractions import Fraction

import numpy as np
import pytest

from affinekit import affine, atlas, cech, cli, cookbook, measure, realization, rng, variation
from affinekit.affine import AffineElement, GroupPresentation
from affinekit.exact import ExactVector, PeriodBasis
from affinekit.io import load_json

A_APPROX = cookbook.A_APPROX
B_APPROX = cookbook.B_APPROX


def _group(name):
    return GroupPresentation.from_json(load_json(name, "group"))


def crit1():
    a1, a2 = affine.analyze(_group("torus1")), affine.analyze(_group("torus2"))
    ok = a1.translational_rank == 2 and a2.translational_rank == 1
    ok &= [v.rational_entries() for v in a1.translational_basis] == [(1, 0), (0, 1)]
    ok &= [v.rational_entries() for v in a2.translational_basis] == [(1, 0)]
    P = _group("torus2")
    bad = 0
    for n in range(-4, 5):
        for m in range(-4, 5):
            expect = AffineElement.of([str(n + Fraction(m * (m - 1), 2)), str(m)], [[1, m], [0, 1]])
            bad += P.evaluate(f"g1^{n} g2^{m}") != expect
    bad += len(affine.closed_form_mismatches(P, 4))
    return ok and bad == 0, f"ranks ({a1.translational_rank}, {a2.translational_rank}), closed-form mismatches {bad}"


def crit2():
    P = _group("z2z2")
    g1, g2 = P.generator("g1"), P.generator("g2")
    e = AffineElement.identity(1)
    ok = True
    for n in range(4):
        want = {e, affine.compose(affine.power(affine.compose(g1, g2), n - 1), g1)}
        got = {w.element for w in affine.isotropy(P, ExactVector.of([f"{n}/2"]))}
        ok &= got == want
    ok &= [w.element for w in affine.isotropy(P, ExactVector.of(["1/3"]))] == [e]
    return ok, "isotropy at n/2 (n=0..3) and 1/3"


def crit3():
    B = PeriodBasis.with_symbols(a=A_APPROX, b=B_APPROX)
    names = lambda v: [str(x[0]) for x in v.basis]
    ra = variation.monodromy_product_family(["a"], ["a"], basis=B)
    rb = variation.monodromy_product_family([], ["b"], basis=B)
    rc = variation.monodromy_product_family(["a"], ["a", "b"], basis=B)
    rq = variation.monodromy_product_family(["1"], ["1", "1/2"])
    ok = ra.mon_verdict.discrete and ra.hol_verdict.discrete and names(ra.mon_verdict) == names(ra.hol_verdict) == ["a"]
    ok &= rb.mon_verdict.discrete and rb.mon_verdict.rank == 0 and names(rb.hol_verdict) == ["b"]
    ok &= names(rc.mon_verdict) == ["a"] and not rc.hol_verdict.discrete
    ok &= rq.hol_verdict.discrete and rq.index.index == 2
    return ok, f"(a) aZ/aZ, (b) 0/bZ, (c) aZ/nondiscrete, rational index {rq.index.index}"


def crit4():
    from test_atlas import _curve, _dev_error, random_atlas, random_loop
    g = np.random.default_rng(4)
    pairs = 0
    ok = True
    while pairs < 1000:
        A = random_atlas(g)
        for _ in range(10):
            ok &= atlas.cocycle_check(A, random_loop(A, A.charts[0], g), random_loop(A, A.charts[0], g))
            pairs += 1
    err = _dev_error(10_000)
    ratio = _dev_error(200) / _dev_error(400)
    ok &= err < 1e-6 and 3.5 <= ratio <= 4.5
    return ok, f"{pairs} loop pairs, numeric dev error {err:.2e}, halving ratio {ratio:.4f}"


def crit5():
    from test_variation import UNI, rand_frac, random_triple
    g = np.random.default_rng(5)
    ok = True
    for _ in range(1000):
        L, h, d = random_triple(g)
        e = ExactVector.of([rand_frac(g) for _ in range(L.transverse_dim)])
        ok &= (variation.variation_along(L, d + e) - variation.variation_along(L, d)
               - variation.variation_along(L, e) + L.omega0).is_zero()
        ok &= variation.variation_along(variation.pi1_action(L, h), d) == \
            variation.variation_along(L, affine.act(h, d))
    z = variation.variation_decomposition(variation.LeafModel.of([[0, 0], [0, 0]]))
    f = variation.variation_decomposition(variation.LeafModel.of([[1, 0], [0, 1]]))
    m = variation.variation_decomposition(variation.LeafModel.of([[1, 0], [2, 0]]))
    ok &= z.zero_variation and not z.full_variation
    ok &= f.full_variation and not f.zero_variation
    ok &= not m.full_variation and not m.zero_variation and m.kernel_basis == ((2, -1),)
    return ok, "1000 triples; zero/full/mixed flags"


def crit6():
    areas = {r: variation.coadjoint_su2_area(r, 256) for r in (0.5, 1.0, 2.0, 3.0)}
    errs = [abs(a / (4 * math.pi * r) - 1) for r, a in areas.items()]
    ratios = [a / r for r, a in areas.items()]
    spread = max(ratios) / min(ratios) - 1
    return max(errs) < 1e-3 and spread < 1e-3, f"max rel error {max(errs):.2e}, area/r spread {spread:.1e}"


def crit7():
    one = realization.period_lattice(realization.builtin("oscillator"), [1.0])
    two = realization.period_lattice(realization.builtin("oscillator2"), [1.0, 1.0])
    dbl = realization.period_lattice(realization.builtin("oscillator", 2.0), [2.0])
    p1 = abs(one.generators[0][0])
    G = np.array(two.generators) / (2 * math.pi)
    e2 = float(np.max(np.abs(G - np.round(G)))) * 2 * math.pi
    ok = abs(p1 - 2 * math.pi) < 1e-6 and G.shape == (2, 2) and e2 < 1e-6
    ok &= abs(abs(np.linalg.det(np.round(G))) - 1) < 1e-9
    ok &= abs(2 * abs(dbl.generators[0][0]) - p1) < 1e-6
    return ok, f"2π error {abs(p1 - 2 * math.pi):.1e}, 2πZ² error {e2:.1e}, 2H generator {abs(dbl.generators[0][0]):.9f}"


def crit8():
    h = measure.s1_on_c2(1_000_000, 7)
    f1, f0 = measure.polynomial_fit(h, 1), measure.polynomial_fit(h, 0)
    slope = abs(f1.coefficients[1] / (4 * math.pi ** 2) - 1)
    pm = [abs(measure.pair_groupoid_mass(A, 100_000, 7).value / A ** 2 - 1) for A in (1.0, 4 * math.pi)]
    ok = slope < 0.02 and f1.max_relative_residual < 0.03 and f0.max_relative_residual > 0.20 and max(pm) < 0.02
    return ok, (f"slope error {slope:.2%}, deg-1 residual {f1.max_relative_residual:.2%}, "
                f"deg-0 residual {f0.max_relative_residual:.0%}, pair mass errors {pm[0]:.2%}/{pm[1]:.2%}")


def crit9():
    fb = measure.fubini_check(lambda x, y, z, b: z * z, samples=100_000, seed=7)
    w = measure.weyl_su2_check("gaussian", 1_000_000, 7)
    ok = fb.discrepancy < 0.01 and w.lhs_error < 0.01 and w.rhs_error < 1e-8
    return ok, f"Fubini {fb.discrepancy:.2%}, Weyl MC {w.lhs_error:.2%}, quadrature {w.rhs_error:.1e}"


def crit10():
    from test_cech import all_nerves, gauge_system, random_cochain, _unit_lift
    g = np.random.default_rng(10)
    ok = True
    for _, N in all_nerves():
        for ring in ("Z", "R", "T"):
            S = gauge_system(N, 2, g, ring)
            for p in range(N.dim - 1):
                c = random_cochain(N, p, 2, ring, g)
                ok &= not any(cech.coboundary(cech.coboundary(c, S), S).values)
    T = cech.torus7()
    St = cech.LocalSystem.trivial(T)
    ok &= [(cech.cohomology(T, St, p).free_rank, cech.cohomology(T, St, p).torsion) for p in range(3)] == \
        [(1, ()), (2, ()), (1, ())]
    data = load_json("twisted_circle_nerve", "nerve")
    C = cech.Nerve.from_json(data)
    Sc = cech.LocalSystem.from_json(C, data)
    ok &= [(cech.cohomology(C, Sc, p).free_rank, cech.cohomology(C, Sc, p).torsion) for p in (0, 1)] == [(1, ()), (1, ())]
    trips = 0
    for i in range(100):
        S = gauge_system(T, 1 + i % 2, g, "T")
        c = cech.triple_product(random_cochain(T, 1, S.rank, "R", g), S)
        lam = cech.dd_trivialize(c, S)
        trips += lam is not None and cech.coboundary(lam.lift(), S).equal_mod_z(c)
    Nb = cech.full_simplex(4, boundary=True)
    half = cech.Cochain.from_mapping(Nb, 2, {(0, 1, 2): Fraction(1, 2)}, ring="T", default=0)
    Sb = cech.LocalSystem.trivial(Nb, ring="T")
    ok &= cech.dd_cocycle_check(half, Sb) and cech.dd_trivialize(half, Sb) is None
    indep = 0
    for _ in range(100):
        k = int(g.integers(-3, 4))
        lift = cech.TransitionLift(cech.coboundary(random_cochain(T, 0, 1, "R", g), St), _unit_lift(T, -k).shifts)
        other = lift.shifted(random_cochain(T, 1, 1, "Z", g))
        indep += cech.chern_class(lift, St) == cech.chern_class(other, St) == cech.CohomologyClass((k,), ())
    ok &= trips == 100 and indep == 100
    return ok, f"round trips {trips}/100, lift independence {indep}/100"


def crit11():
    outs = {}
    for threads in ("1", "2", "1"):
        for name in cookbook.names():
            buf = _io.StringIO()
            with redirect_stdout(buf), redirect_stderr(_io.StringIO()):
                code = cli.main(["--threads", threads, "cookbook", "run", name, "--seed", "3"])
            outs.setdefault(name, []).append((code, buf.getvalue()))
    rng.set_threads(1)
    bad = [n for n, v in outs.items() if len({o for o in v}) != 1 or v[0][0] != 0]
    return not bad, f"{len(outs)} scenarios x 3 runs (threads 1, 2, 1); differing: {bad or 'none'}"


CRITERIA = [
    (1, "torus structures", crit1, 1.0),
    (2, "Z2*Z2 isotropy", crit2, 1.0),
    (3, "monodromy family", crit3, 1.0),
    (4, "developing map and holonomy", crit4, 10.0),
    (5, "linear variation", crit5, 5.0),
    (6, "su(2) coadjoint areas", crit6, 10.0),
    (7, "period lattices", crit7, 30.0),
    (8, "DH measure and pair groupoid", crit8, 60.0),
    (9, "Fubini and Weyl", crit9, 60.0),
    (10, "Čech suite", crit10, 30.0),
    (11, "determinism", crit11, None),
]


def evaluate(fn, limit):
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    timed = limit is None or dt < limit
    return bool(ok) and timed, f"{detail}; {dt:.2f}s" + ("" if limit is None else f" (limit {limit:g}s)")


@pytest.mark.parametrize("num,title,fn,limit", CRITERIA, ids=[f"criterion-{c[0]}" for c in CRITERIA])
def test_criterion(num, title, fn, limit, capsys):
    ok, detail = evaluate(fn, limit)
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {title}: {detail}")
    assert ok, detail


if __name__ == "__main__":
    import sys
    sys.path.insert(0, __import__("os").path.dirname(__file__))
    failed = 0
    for num, title, fn, limit in CRITERIA:
        ok, detail = evaluate(fn, limit)
        failed += not ok
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title}: {detail}")
    sys.exit(1 if failed else 0)
