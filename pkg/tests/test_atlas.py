import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from affinekit import atlas, kernels
from affinekit.affine import AffineElement, GroupPresentation
from affinekit.atlas import AtlasError, AtlasGraph, BaseMismatch, Edge, EdgePath, InconsistentCrossing, InvalidPath, NotALoop
from affinekit.io import load_json


def unimodular_pool(q, bound=3):
    pool = []
    for entries in itertools.product(range(-bound, bound + 1), repeat=q * q):
        M = [list(entries[i * q:(i + 1) * q]) for i in range(q)]
        if abs(round(np.linalg.det(np.array(M, dtype=float)))) == 1:
            pool.append(M)
    return pool


POOLS = {1: [[[1]], [[-1]]], 2: unimodular_pool(2)}


def pool(q, rng):
    if q in POOLS:
        return POOLS[q]
    # q = 3: sample entries in [-3, 3] until the determinant is +-1
    out = []
    while len(out) < 200:
        M = rng.integers(-3, 4, size=(3, 3))
        if abs(round(np.linalg.det(M))) == 1:
            out.append(M.tolist())
    POOLS[3] = out
    return out


def random_atlas(rng):
    q = int(rng.integers(1, 4))
    charts = tuple(f"U{i}" for i in range(int(rng.integers(1, 4))))
    mats = pool(q, rng)
    edges = {}
    for i in range(int(rng.integers(len(charts), len(charts) + 3))):
        src, dst = rng.choice(charts), rng.choice(charts)
        if i < len(charts) - 1:  # keep the chart graph connected
            src, dst = charts[i], charts[i + 1]
        u = [str(Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4)))) for _ in range(q)]
        A = mats[int(rng.integers(len(mats)))]
        edges[f"e{i}"] = Edge(f"e{i}", str(src), str(dst), AffineElement.of(u, A))
    return AtlasGraph(q, charts, edges)


def random_loop(A: AtlasGraph, base, rng, max_len=6):
    """Random walk from ``base`` closed up along a shortest path back to it."""
    here, applied = base, []
    for _ in range(int(rng.integers(0, max_len))):
        out = [e for e in A.edges.values() if e.source == here]
        e = out[int(rng.integers(len(out)))]
        applied.append(e.name)
        here = e.target
    prev = {here: None}
    queue = [here]
    while base not in prev:
        c = queue.pop(0)
        for e in A.edges.values():
            if e.source == c and e.target not in prev:
                prev[e.target] = e
                queue.append(e.target)
    back, c = [], base
    while prev[c] is not None:
        back.insert(0, prev[c].name)
        c = prev[c].source
    # the word lists edges right to left in order of application
    return EdgePath(base, tuple(reversed(applied + back)))


def augmented(g: AffineElement):
    q = g.dim
    M = np.eye(q + 1, dtype=object)
    for i in range(q):
        for j in range(q):
            M[i, j] = Fraction(g.A[i][j])
        M[i, q] = g.u.rational_entries()[i]
    return M


def augmented_dev(A: AtlasGraph, loop: EdgePath):
    M = np.eye(A.dim + 1, dtype=object)
    for name in loop.word:
        M = M.dot(augmented(A.edge(name).element))
    return tuple(M[i, A.dim] for i in range(A.dim)), [[int(M[i, j]) for j in range(A.dim)] for i in range(A.dim)]


def test_cocycle_identity_random_atlases():
    rng = np.random.default_rng(2024)
    pairs = 0
    while pairs < 1000:
        A = random_atlas(rng)
        base = A.charts[0]
        for _ in range(10):
            g, t = random_loop(A, base, rng), random_loop(A, base, rng)
            assert atlas.path_end(A, g) == base and atlas.path_end(A, t) == base
            assert atlas.cocycle_check(A, g, t)
            # independent oracle: product of augmented matrices
            h = atlas.holonomy(A, t + g)
            dev, lin = augmented_dev(A, t + g)
            assert h.dev.rational_entries() == dev
            assert [list(r) for r in h.linear] == lin
            pairs += 1


def test_reverse_edges_and_errors():
    A = AtlasGraph.from_json(load_json("torus2_atlas", "atlas"))
    assert A.edge("g2^-1").element == atlas.invert(A.edge("g2").element)
    with pytest.raises(InvalidPath):
        atlas.holonomy(A, EdgePath.of("U", "nope"))
    B = AtlasGraph(1, ("U", "V"), {"a": Edge("a", "U", "V", AffineElement.of(["1"]))})
    with pytest.raises(NotALoop):
        atlas.holonomy(B, EdgePath.of("U", "a"))
    with pytest.raises(InvalidPath):
        atlas.develop_path(B, EdgePath.of("U", "a a"))
    with pytest.raises(BaseMismatch):
        atlas.cocycle_check(B, EdgePath.of("U"), EdgePath.of("V"))
    with pytest.raises(AtlasError):
        AtlasGraph(1, ("U",), {"a": Edge("a", "U", "U", AffineElement.of(["1"]))}, ("a",))


def test_torus_holonomies():
    A1 = AtlasGraph.from_json(load_json("torus1_atlas", "atlas"))
    A2 = AtlasGraph.from_json(load_json("torus2_atlas", "atlas"))
    h = atlas.holonomy(A1, EdgePath.of("U", "g1"))
    assert h.dev.rational_entries() == (1, 0) and h.linear == ((1, 0), (0, 1))
    h = atlas.holonomy(A2, EdgePath.of("U", "g2"))
    assert h.dev.rational_entries() == (0, 1) and h.linear == ((1, 1), (0, 1))
    end, comp = atlas.develop_path(A2, EdgePath.of("U", "g1 g2", ["1/2", "0"]))
    assert end.rational_entries() == (Fraction(3, 2), 1)
    assert AtlasGraph.from_json(A2.to_json()).edges.keys() == A2.edges.keys()


def _curve(t):
    return np.array([0.3 + 0.9 * t + 0.2 * math.sin(2 * t), 0.1 + 1.3 * t + 0.25 * t * t])


def _velocity(t):
    return np.array([0.9 + 0.4 * math.cos(2 * t), 1.3 + 0.5 * t])


def test_numeric_dev_loop_exact():
    P = atlas.torus_family(1)
    n = 10_000
    t = np.linspace(0.0, 1.0, n + 1)
    pts = np.stack([np.zeros_like(t), t], axis=1)
    pts[-1] = [0.0, 0.0]
    vel = np.tile([0.0, 1.0], (n + 1, 1))
    vel[-1] = [-1.0, 1.0]
    d = atlas.numeric_dev(P, t, pts, vel, ["e"] * n + ["g2"])
    assert np.max(np.abs(d - [0.0, 1.0])) < 1e-6


def _dev_error(n, backend=None):
    P = atlas.torus_family(1)
    t, x, v, charts = atlas.sample_quotient_path(_curve, _velocity, atlas.locate_torus(1), n)
    d = atlas.numeric_dev(P, t, x, v, charts, backend=backend)
    return np.max(np.abs(d - (_curve(1.0) - _curve(0.0))))


def test_numeric_dev_second_order():
    assert _dev_error(10_000) < 1e-6
    ratio = _dev_error(200) / _dev_error(400)
    assert 3.5 <= ratio <= 4.5


@pytest.mark.skipif(not kernels.HAS_NUMBA, reason="numba unavailable")
def test_numeric_dev_backends_agree():
    assert _dev_error(300, "numpy") == pytest.approx(_dev_error(300, "numba"), rel=1e-9, abs=1e-15)


def test_numeric_dev_rejects_jump():
    P = atlas.torus_family(1)
    t = np.linspace(0, 1, 5)
    pts = np.stack([np.zeros(5), t], axis=1)
    pts[2] = [0.5, 0.5]
    with pytest.raises(InconsistentCrossing):
        atlas.numeric_dev(P, t, pts, np.tile([0.0, 1.0], (5, 1)), ["e"] * 5)
    with pytest.raises(InconsistentCrossing):
        atlas.numeric_dev(P, t, pts, np.tile([0.0, 1.0], (5, 1)), ["e", "e", "g1^4", "e", "e"])
