"""Combinatorial integral affine atlases, developing maps and holonomy.

An edge ``e: s -> t`` carries the transition taking chart-``s`` coordinates to
chart-``t`` coordinates. A path is written as a word of edge names and the
rightmost edge is applied first, so ``"a b"`` starts in the source chart of
``b`` and its composite is ``a ∘ b``. This makes the translation parts obey
``u_{ab} = u_a + A_a u_b``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .affine import AffineElement, GroupPresentation, compose, enumerate_words, invert, act
from .exact import RATIONAL, DimMismatch, ExactError, ExactVector, PeriodBasis, align, int_matvec


class AtlasError(ExactError):
    pass


class InvalidPath(AtlasError):
    pass


class NotALoop(AtlasError):
    pass


class BaseMismatch(AtlasError):
    pass


class InconsistentCrossing(AtlasError):
    pass


INV = "^-1"


def _inverse_name(name: str) -> str:
    return name[:-len(INV)] if name.endswith(INV) else name + INV


@dataclass(frozen=True)
class Edge:
    name: str
    source: str
    target: str
    element: AffineElement


@dataclass(frozen=True)
class EdgePath:
    start: str
    word: tuple[str, ...] = ()
    x0: ExactVector | None = None

    @classmethod
    def of(cls, start: str, word: str | Sequence[str] = (), x0=None, basis: PeriodBasis = RATIONAL):
        if isinstance(word, str):
            word = tuple(w for w in word.split() if w not in ("e", "id"))
        if x0 is not None and not isinstance(x0, ExactVector):
            x0 = ExactVector.of(x0, basis)
        return cls(start, tuple(word), x0)

    def __add__(self, other: "EdgePath") -> "EdgePath":
        """``p + q`` runs ``q`` first, then ``p`` (word concatenation)."""
        return EdgePath(other.start, self.word + other.word, other.x0)


@dataclass(frozen=True)
class HolonomyResult:
    affine: AffineElement
    linear: tuple
    dev: ExactVector

    def to_json(self) -> dict:
        return {"dev": self.dev.to_json(), "linear": [list(r) for r in self.linear],
                "affine": self.affine.to_json()}


@dataclass
class AtlasGraph:
    dim: int
    charts: tuple[str, ...]
    edges: dict[str, Edge] = field(default_factory=dict)
    two_cells: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self):
        self.charts = tuple(self.charts)
        if len(set(self.charts)) != len(self.charts):
            raise AtlasError("duplicate chart names")
        edges = dict(self.edges)
        for name, e in list(edges.items()):
            self._check_edge(e)
            rname = _inverse_name(name)
            if rname not in edges:
                edges[rname] = Edge(rname, e.target, e.source, invert(e.element))
            elif edges[rname].element != invert(e.element):
                raise AtlasError(f"edge {rname!r} is not the inverse of {name!r}")
        if edges:
            us = align(*(e.element.u for e in edges.values()))
            edges = {n: Edge(n, e.source, e.target, AffineElement(u, e.element.A))
                     for (n, e), u in zip(edges.items(), us)}
        self.edges = edges
        self.two_cells = tuple(tuple(w.split()) if isinstance(w, str) else tuple(w) for w in self.two_cells)
        for cell in self.two_cells:
            if not cell:
                continue
            start = self.edge(cell[-1]).source
            res = develop_path(self, EdgePath(start, cell))
            if self.edge(cell[0]).target != start or not res[1].is_identity:
                raise AtlasError(f"two-cell {' '.join(cell)!r} does not compose to the identity")

    def _check_edge(self, e: Edge):
        if e.source not in self.charts or e.target not in self.charts:
            raise AtlasError(f"edge {e.name!r} references an unknown chart")
        if e.element.dim != self.dim:
            raise DimMismatch(f"edge {e.name!r} has dim {e.element.dim}, atlas has {self.dim}")

    @property
    def basis(self) -> PeriodBasis:
        return next(iter(self.edges.values())).element.u.basis if self.edges else RATIONAL

    def edge(self, name: str) -> Edge:
        try:
            return self.edges[name]
        except KeyError:
            raise InvalidPath(f"unknown edge {name!r}") from None

    @classmethod
    def from_presentation(cls, P: GroupPresentation, chart: str = "U") -> "AtlasGraph":
        """One-chart atlas of ``R^q/Γ`` with a self-edge per generator."""
        return cls(P.dim, (chart,), {n: Edge(n, chart, chart, g) for n, g in P.generators})

    @classmethod
    def from_json(cls, data: Mapping) -> "AtlasGraph":
        basis = PeriodBasis.from_json(data.get("basis"))
        q = int(data["dim"])
        edges = {}
        for i, e in enumerate(data.get("edges", [])):
            name = e.get("name", f"e{i}")
            A = e.get("A", [[int(r == c) for c in range(q)] for r in range(q)])
            edges[name] = Edge(name, e["from"], e["to"], AffineElement.of(e["u"], A, basis))
        return cls(q, tuple(data["charts"]), edges, tuple(data.get("two_cells", ())))

    def to_json(self) -> dict:
        out = {"dim": self.dim, "charts": list(self.charts),
               "edges": [{"name": e.name, "from": e.source, "to": e.target, **e.element.to_json()}
                         for e in self.edges.values() if not e.name.endswith(INV)],
               "two_cells": [" ".join(c) for c in self.two_cells]}
        if not self.basis.is_rational:
            out["basis"] = self.basis.to_json()
        return out


def path_end(atlas: AtlasGraph, path: EdgePath) -> str:
    """Chart where the path ends; raises InvalidPath if edges are not incident."""
    if path.start not in atlas.charts:
        raise InvalidPath(f"unknown start chart {path.start!r}")
    here = path.start
    for name in reversed(path.word):
        e = atlas.edge(name)
        if e.source != here:
            raise InvalidPath(f"edge {name!r} leaves {e.source!r}, path is at {here!r}")
        here = e.target
    return here


def develop_path(atlas: AtlasGraph, path: EdgePath) -> tuple[ExactVector | None, AffineElement]:
    """Compose edge labels along the path; returns ``(endpoint, composite)``."""
    path_end(atlas, path)
    comp = AffineElement.identity(atlas.dim, atlas.basis)
    for name in path.word:
        comp = compose(comp, atlas.edge(name).element)
    if path.x0 is None:
        return None, comp
    if path.x0.dim != atlas.dim:
        raise DimMismatch(f"start point has dim {path.x0.dim}, atlas has {atlas.dim}")
    return act(comp, path.x0), comp


def holonomy(atlas: AtlasGraph, loop: EdgePath) -> HolonomyResult:
    if path_end(atlas, loop) != loop.start:
        raise NotALoop(f"path from {loop.start!r} does not return to it")
    _, g = develop_path(atlas, loop)
    return HolonomyResult(g, g.A, g.u)


def cocycle_check(atlas: AtlasGraph, gamma: EdgePath, tau: EdgePath) -> bool:
    """Exact check of ``dev(γ∘τ) = dev(τ) + h_lin(τ) dev(γ)``.

    ``γ∘τ`` is the concatenated word ``τ.word + γ.word``, developed as a path.
    """
    if gamma.start != tau.start:
        raise BaseMismatch(f"loops are based at {gamma.start!r} and {tau.start!r}")
    ht, hg = holonomy(atlas, tau), holonomy(atlas, gamma)
    _, comp = develop_path(atlas, tau + gamma)
    dt, dg = align(ht.dev, hg.dev)
    rhs = dt + int_matvec(ht.linear, dg)
    lhs, rhs = align(comp.u, rhs)
    return lhs == rhs


# ---------------------------------------------------------------------------
# numeric developing map on a quotient model R^q / Γ


def _as_element(P: GroupPresentation, label) -> AffineElement:
    if isinstance(label, AffineElement):
        return label
    return P.evaluate(label)


def _float_element(g: AffineElement) -> tuple[np.ndarray, np.ndarray]:
    return np.array(g.u.to_float()), np.array(g.A, dtype=float)


def numeric_dev(P: GroupPresentation, t, points, velocities, charts, backend: str | None = None) -> np.ndarray:
    """Trapezoid approximation of ``∫ h_lin(γ_ε) γ'(ε) dε`` on ``R^q/Γ``.

    Sample ``i`` has chart coordinates ``points[i]``, chart velocity
    ``velocities[i]`` and a chart label (word or element) ``g_i``, meaning the
    lifted path passes through ``g_i·points[i]``. Consecutive labels must
    differ by a short word in the generators, and the chart coordinates must
    match across every crossing. The result is expressed in the first chart.
    """
    t = np.asarray(t, dtype=float)
    x = np.atleast_2d(np.asarray(points, dtype=float))
    v = np.atleast_2d(np.asarray(velocities, dtype=float))
    n, q = v.shape
    if q != P.dim or x.shape != v.shape or len(t) != n or len(charts) != n:
        raise DimMismatch("sample arrays disagree in length or dimension")
    if n < 2 or np.any(np.diff(t) <= 0):
        raise InconsistentCrossing("need at least two samples with increasing times")
    steps = {w.element for w in enumerate_words(P, max(1, P.dim))}
    cache: dict = {}
    elems = []
    for c in charts:
        key = c if isinstance(c, (str, AffineElement)) else tuple(c)
        if key not in cache:
            cache[key] = _as_element(P, c)
        elems.append(cache[key])
    floats = {g: _float_element(g) for g in set(elems)}
    mats = np.stack([floats[g][1] for g in elems])
    scale = np.max(np.linalg.norm(v, axis=1))
    for i in range(n - 1):
        g, h = elems[i], elems[i + 1]
        dt = t[i + 1] - t[i]
        if g == h:
            moved = x[i]
        else:
            step = compose(invert(h), g)
            if step not in steps:
                raise InconsistentCrossing(f"samples {i},{i + 1}: chart change is not a generator step")
            u, A = _float_element(step)
            moved = A @ x[i] + u
        tol = 2.0 * dt * scale * max(1.0, np.abs(mats[i]).max()) + 1e-12
        if np.linalg.norm(moved - x[i + 1]) > tol:
            raise InconsistentCrossing(f"samples {i},{i + 1}: coordinates jump by "
                                       f"{np.linalg.norm(moved - x[i + 1]):.3g}")
    total = kernels.get_backend(backend).transported_trapezoid(t, mats, v)
    return np.linalg.solve(mats[0], total)


def torus_family(k: int) -> GroupPresentation:
    """``γ1 = ((1,0), I)``, ``γ2 = ((0,1), [[1,k],[0,1]])``; ``k = 0`` is the
    standard torus, ``k = 1`` the second torus structure."""
    from .affine import ClosedForm
    cf = ClosedForm(("n", "m"), (f"n + {k}*m*(m-1)/2", "m"), (("1", f"{k}*m"), ("0", "1")))
    return GroupPresentation(2, (("g1", AffineElement.of(["1", "0"])),
                                 ("g2", AffineElement.of(["0", "1"], [[1, k], [0, 1]]))), cf, 4)


def locate_torus(k: int):
    """Map a point of ``R^2`` to ``(γ1^n γ2^m, base point in [0,1)^2)`` for ``torus_family(k)``."""
    P = torus_family(k)
    cache: dict = {}

    def locate(X):
        m = math.floor(X[1])
        y = X[1] - m
        xf = X[0] - k * m * y - k * m * (m - 1) / 2
        n = math.floor(xf)
        if (n, m) not in cache:
            cache[(n, m)] = P.closed_form.evaluate((n, m))
        return cache[(n, m)], np.array([xf - n, y])
    return locate


def sample_quotient_path(curve, velocity, locate, n: int, t0: float = 0.0, t1: float = 1.0):
    """Sample a lifted curve into ``(t, points, velocities, charts)`` for :func:`numeric_dev`."""
    t = np.linspace(t0, t1, n + 1)
    pts, vels, charts = [], [], []
    for s in t:
        g, x = locate(np.asarray(curve(s), dtype=float))
        A = np.array(g.A, dtype=float)
        pts.append(x)
        vels.append(np.linalg.solve(A, np.asarray(velocity(s), dtype=float)))
        charts.append(g)
    return t, np.array(pts), np.array(vels), charts
