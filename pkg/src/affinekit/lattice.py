"""Lattices and finitely generated closed subgroups of R^q.

The closure of a finitely generated subgroup ``C`` of R^q splits as
``cospan(C) ⊕ L`` with ``L`` discrete. The computation:

1. Remove integer relations among the generators. Relations are read off the
   symbol expansion, which is exact because the period symbols are asserted
   independent over Q. This leaves a Z-basis ``b_1..b_m`` of ``C``.
2. Let ``K`` be the real kernel of ``t -> sum t_j b_j``. The closure of
   ``Z^m + K`` is ``Z^m + K_Q``, where ``K_Q`` is the smallest rational subspace
   containing ``K``. So ``cospan(C)`` is the image of ``K_Q`` and a complement
   of ``Z^m ∩ K_Q`` gives the discrete part.

Real ranks and kernels are computed over the rational function field in the
irrational symbols (generic model), then cross-checked against the symbols'
high-precision approximations. A disagreement raises ``SymbolRelationError``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import mpmath
import sympy
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from . import intmat
from .exact import (RATIONAL, DimMismatch, ExactError, ExactVector, PeriodBasis, align,
                    common_basis, fraction_str)
from .intmat import smith_normal_form  # noqa: F401  (re-exported)


class LatticeError(ExactError):
    pass


class NotFullRank(LatticeError):
    pass


class NonRationalLattice(LatticeError):
    pass


class NotIndependent(LatticeError):
    pass


class SymbolRelationError(LatticeError):
    """The numeric approximations contradict the generic symbol model."""


# ---------------------------------------------------------------------------
# symbolic field plumbing

class _Field:
    def __init__(self, basis: PeriodBasis):
        self.basis = basis
        self.syms = [sympy.Symbol(f"s{i}") for i in range(1, basis.size)]
        self.K = QQ.frac_field(*self.syms) if self.syms else QQ

    def scalar(self, coeffs: Sequence[Fraction]):
        K = self.K
        expr = sympy.Rational(coeffs[0].numerator, coeffs[0].denominator)
        for c, s in zip(coeffs[1:], self.syms):
            if c:
                expr += sympy.Rational(c.numerator, c.denominator) * s
        return K.from_sympy(expr)

    def columns(self, vectors: Sequence[ExactVector], q: int) -> DomainMatrix:
        rows = [[self.scalar(v.coeffs[i]) for v in vectors] for i in range(q)]
        return DomainMatrix(rows, (q, len(vectors)), self.K)

    def monomial_rows(self, entries) -> list[list[Fraction]]:
        """Expand a row of field elements into rational rows, one per monomial,
        after clearing the common denominator."""
        if not self.syms:
            return [[_qq_fraction(e) for e in entries]]
        den = self.K.field.ring.one
        for e in entries:
            den = den.lcm(e.denom)
        polys = [e.numer * den.exquo(e.denom) for e in entries]
        monos = sorted({m for p in polys for m, _ in p.terms()})
        rows = []
        for mono in monos:
            rows.append([_qq_fraction(dict(p.terms()).get(mono, 0)) for p in polys])
        return rows or [[Fraction(0)] * len(entries)]


def _qq_fraction(c) -> Fraction:
    if isinstance(c, int):
        return Fraction(c)
    return Fraction(int(c.numerator), int(c.denominator))


def _numeric_rank(vectors: Sequence[ExactVector], q: int, basis: PeriodBasis) -> int:
    if not vectors:
        return 0
    dps = basis.precision()
    with mpmath.workdps(dps + 10):
        vals = basis.approximations()
        M = mpmath.matrix(q, len(vectors))
        for j, v in enumerate(vectors):
            for i in range(q):
                M[i, j] = mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * a
                                      for c, a in zip(v.coeffs[i], vals))
        sv = mpmath.svd_r(M, compute_uv=False)
        top = max(abs(x) for x in sv) if len(sv) else 0
        if top == 0:
            return 0
        tol = top * mpmath.mpf(10) ** (-(dps // 2))
        return sum(1 for x in sv if abs(x) > tol)


def _rank(vectors: Sequence[ExactVector], q: int, basis: PeriodBasis, fld: _Field | None = None) -> int:
    if not vectors:
        return 0
    if basis.is_rational:
        return intmat.rank_q([[v.coeffs[i][0] for v in vectors] for i in range(q)])
    fld = fld or _Field(basis)
    r = fld.columns(vectors, q).rank()
    rn = _numeric_rank(vectors, q, basis)
    if r != rn:
        raise SymbolRelationError(
            f"generic rank {r} but numeric rank {rn}: the period symbols satisfy a "
            "polynomial relation the symbol model cannot see")
    return r


def independent_subset(vectors: Sequence[ExactVector], q: int, basis: PeriodBasis) -> list[ExactVector]:
    """Greedy R-independent subset, keeping input order."""
    fld = None if basis.is_rational else _Field(basis)
    chosen: list[ExactVector] = []
    for v in vectors:
        if v.is_zero():
            continue
        if _rank(chosen + [v], q, basis, fld) > len(chosen):
            chosen.append(v)
    return chosen


def _combine(vectors: Sequence[ExactVector], coeffs: Sequence[int], q: int, basis: PeriodBasis) -> ExactVector:
    out = ExactVector.zeros(q, basis)
    for v, c in zip(vectors, coeffs):
        if c:
            out = out + v * c
    return out


def canonical_basis(vectors: Sequence[ExactVector]) -> tuple[ExactVector, ...]:
    """HNF-canonical Z-basis of the group generated by Q-independent vectors."""
    if not vectors:
        return ()
    q, basis = vectors[0].dim, vectors[0].basis
    flats = [v.flat() for v in vectors]
    d = intmat.denominator_lcm(x for f in flats for x in f)
    H = intmat.hermite_normal_form([[int(x * d) for x in f] for f in flats])
    s = basis.size
    out = []
    for row in H:
        coeffs = tuple(tuple(Fraction(row[i * s + k], d) for k in range(s)) for i in range(q))
        out.append(ExactVector(coeffs, basis))
    return tuple(out)


# ---------------------------------------------------------------------------
# closed subgroups

@dataclass(frozen=True)
class Decomposition:
    span: tuple[ExactVector, ...]
    cospan: tuple[ExactVector, ...]
    discrete: tuple[ExactVector, ...]
    group_rank: int
    notes: tuple[str, ...] = ()

    @property
    def discrete_rank(self) -> int:
        return len(self.discrete)


@dataclass(frozen=True)
class ClosedSubgroup:
    """Closure of ``span_R(subspace) + Z<generators>`` inside R^q."""

    dim: int
    generators: tuple[ExactVector, ...] = ()
    subspace: tuple[ExactVector, ...] = ()

    def __post_init__(self):
        gens = tuple(self.generators)
        sub = tuple(self.subspace)
        for v in gens + sub:
            if v.dim != self.dim:
                raise DimMismatch(f"vector of dim {v.dim} in subgroup of R^{self.dim}")
        if gens or sub:
            aligned = align(*(gens + sub))
            gens, sub = aligned[:len(gens)], aligned[len(gens):]
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "subspace", sub)

    @classmethod
    def of(cls, dim: int, generators: Sequence, basis: PeriodBasis = RATIONAL, subspace: Sequence = ()):
        gens = tuple(g if isinstance(g, ExactVector) else ExactVector.of(g, basis) for g in generators)
        sub = tuple(g if isinstance(g, ExactVector) else ExactVector.of(g, basis) for g in subspace)
        return cls(dim, gens, sub)

    @property
    def basis(self) -> PeriodBasis:
        return common_basis(self.generators + self.subspace)

    @property
    def is_rational(self) -> bool:
        return all(v.is_rational for v in self.generators + self.subspace)

    @cached_property
    def decomposition(self) -> Decomposition:
        return _decompose(self)

    def contains(self, v: ExactVector) -> bool:
        """Exact membership in the closure (cospan + discrete part); rational only."""
        if not (self.is_rational and v.is_rational):
            raise LatticeError("membership is only decided for rational subgroups")
        dec = self.decomposition
        cols = list(dec.cospan) + list(dec.discrete)
        A = [[c.coeffs[i][0] for c in cols] for i in range(self.dim)]
        x = intmat.solve_q(A, [v.coeffs[i][0] for i in range(self.dim)])
        return x is not None and all(t.denominator == 1 for t in x[len(dec.cospan):])

    def to_json(self) -> dict:
        out = {"dim": self.dim, "generators": [g.to_json() for g in self.generators]}
        if self.subspace:
            out["subspace"] = [g.to_json() for g in self.subspace]
        if not self.basis.is_rational:
            out["basis"] = self.basis.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict, basis: PeriodBasis | None = None) -> "ClosedSubgroup":
        basis = basis or PeriodBasis.from_json(data.get("basis"))
        return cls.of(int(data["dim"]), data.get("generators", []), basis, data.get("subspace", []))


def _decompose(C: ClosedSubgroup) -> Decomposition:
    q = C.dim
    basis = C.basis
    notes = (basis.assertion,) if basis.assertion else ()
    gens = [g.rebase(basis) for g in C.generators]
    sub = independent_subset([w.rebase(basis) for w in C.subspace], q, basis)
    fld = _Field(basis)

    # projection killing the subspace part
    if sub:
        Wt = fld.columns(sub, q).transpose()
        N = Wt.nullspace().to_Matrix()  # rows span ann(W)
        Nd = DomainMatrix.from_Matrix(N).convert_to(fld.K).to_dense() if N.rows else None
    else:
        Nd = DomainMatrix.eye(q, fld.K).to_dense()

    def project(vs):
        if not vs:
            return None
        M = fld.columns(vs, q)
        return Nd.matmul(M) if Nd is not None else None

    # 1. integer relations among the projected generators
    n = len(gens)
    P = project(gens)
    if P is None or n == 0:
        rel_rows = []
    else:
        rel_rows = []
        for i in range(P.shape[0]):
            rel_rows.extend(fld.monomial_rows([P[i, j].element for j in range(n)]))
    if n:
        ker = intmat.nullspace_q(rel_rows, n) if rel_rows else [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
        kcols = intmat.transpose(ker) if ker else [[] for _ in range(n)]
        Ksat = intmat.saturate_columns(kcols) if ker else [[] for _ in range(n)]
        E = intmat.complete_basis(Ksat)
    else:
        E = []
    m = len(E[0]) if E else 0
    bvecs = [_combine(gens, [E[j][l] for j in range(n)], q, basis) for l in range(m)]

    # 2. real kernel of the projected basis and its rational hull
    Kq_rows: list[list[Fraction]] = []
    if m:
        B = project(bvecs)
        if B is None:  # projection onto zero space: everything lies in the subspace
            Kq_rows = [[Fraction(int(i == j)) for i in range(m)] for j in range(m)]
        else:
            d = B.rank()
            if not basis.is_rational:
                proj_exact = None
                if not sub:
                    proj_exact = bvecs
                if proj_exact is not None:
                    rn = _numeric_rank(proj_exact, q, basis)
                    if rn != d:
                        raise SymbolRelationError(
                            f"generic rank {d} but numeric rank {rn}: the period symbols "
                            "satisfy a polynomial relation the symbol model cannot see")
            if d < m:
                kf = B.nullspace().to_Matrix()
                for r in range(kf.rows):
                    row = [fld.K.from_sympy(kf[r, c]) for c in range(m)]
                    Kq_rows.extend(fld.monomial_rows(row))
    if Kq_rows and any(any(r) for r in Kq_rows):
        R, piv = intmat.rref(Kq_rows)
        kq = [R[i] for i in range(len(piv))]
    else:
        kq = []
    p = len(kq)
    if p:
        Ksat2 = intmat.saturate_columns(intmat.transpose(kq))
        E2 = intmat.complete_basis(Ksat2)
        dense = [_combine(bvecs, [Ksat2[j][l] for j in range(m)], q, basis) for l in range(p)]
    else:
        E2 = intmat.identity(m)
        dense = []
    discrete = [_combine(bvecs, [E2[j][l] for j in range(m)], q, basis) for l in range(m - p)]

    cospan = tuple(independent_subset(sub + dense, q, basis))
    span = tuple(independent_subset(sub + gens, q, basis))
    if not cospan:
        discrete = list(canonical_basis(discrete))
    return Decomposition(span=span, cospan=cospan, discrete=tuple(discrete),
                         group_rank=m, notes=notes)


# ---------------------------------------------------------------------------
# lattices

@dataclass(frozen=True)
class Lattice:
    dim: int
    basis_vectors: tuple[ExactVector, ...]

    def __post_init__(self):
        vs = tuple(self.basis_vectors)
        for v in vs:
            if v.dim != self.dim:
                raise DimMismatch(f"vector of dim {v.dim} in lattice of R^{self.dim}")
        if vs:
            vs = align(*vs)
            if _rank(list(vs), self.dim, vs[0].basis) != len(vs):
                raise NotIndependent("lattice basis vectors are not linearly independent")
        object.__setattr__(self, "basis_vectors", vs)

    @classmethod
    def of(cls, dim: int, vectors: Sequence, basis: PeriodBasis = RATIONAL) -> "Lattice":
        return cls(dim, tuple(v if isinstance(v, ExactVector) else ExactVector.of(v, basis) for v in vectors))

    @classmethod
    def standard(cls, q: int) -> "Lattice":
        return cls.of(q, [[int(i == j) for j in range(q)] for i in range(q)])

    @property
    def rank(self) -> int:
        return len(self.basis_vectors)

    @property
    def basis(self) -> PeriodBasis:
        return common_basis(self.basis_vectors)

    @property
    def is_rational(self) -> bool:
        return all(v.is_rational for v in self.basis_vectors)

    def matrix(self) -> list[list[Fraction]]:
        """Rational basis matrix, basis vectors as columns."""
        if not self.is_rational:
            raise NonRationalLattice("lattice has irrational symbol components")
        return [[v.coeffs[i][0] for v in self.basis_vectors] for i in range(self.dim)]

    def subgroup(self) -> ClosedSubgroup:
        return ClosedSubgroup(self.dim, self.basis_vectors)

    def canonical(self) -> tuple[ExactVector, ...]:
        return canonical_basis(self.basis_vectors)

    def same_group(self, other: "Lattice") -> bool:
        return self.dim == other.dim and self.canonical() == other.canonical()

    def contains(self, v: ExactVector) -> bool:
        vs = align(v, *self.basis_vectors) if self.basis_vectors else (v,)
        v, bs = vs[0], vs[1:]
        if not bs:
            return v.is_zero()
        flats = [b.flat() for b in bs]
        A = intmat.transpose(flats)
        x = intmat.solve_q(A, list(v.flat()))
        return x is not None and all(t.denominator == 1 for t in x)

    def to_json(self) -> dict:
        out = {"dim": self.dim, "generators": [g.to_json() for g in self.basis_vectors]}
        if not self.basis.is_rational:
            out["basis"] = self.basis.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict, basis: PeriodBasis | None = None) -> "Lattice":
        basis = basis or PeriodBasis.from_json(data.get("basis"))
        return cls.of(int(data["dim"]), data.get("generators", []), basis)


def dual_lattice(L: Lattice) -> Lattice:
    if L.rank != L.dim:
        raise NotFullRank(f"lattice of rank {L.rank} in R^{L.dim}")
    M = L.matrix()
    inv_t = intmat.transpose(intmat.inverse_q(M))
    return Lattice.of(L.dim, [[inv_t[i][j] for i in range(L.dim)] for j in range(L.dim)])


def span(C: ClosedSubgroup) -> tuple[ExactVector, ...]:
    return C.decomposition.span


def cospan(C: ClosedSubgroup) -> tuple[ExactVector, ...]:
    return C.decomposition.cospan


@dataclass(frozen=True)
class Discrete:
    basis: tuple[ExactVector, ...]
    notes: tuple[str, ...] = ()
    discrete = True

    @property
    def rank(self) -> int:
        return len(self.basis)

    def lattice(self, dim: int) -> Lattice:
        return Lattice(dim, self.basis)


@dataclass(frozen=True)
class NonDiscrete:
    cospan: tuple[ExactVector, ...]
    notes: tuple[str, ...] = ()
    discrete = False


def is_discrete(C: ClosedSubgroup) -> Discrete | NonDiscrete:
    dec = C.decomposition
    if dec.cospan:
        return NonDiscrete(dec.cospan, dec.notes)
    return Discrete(dec.discrete, dec.notes)


@dataclass(frozen=True)
class IndexResult:
    index: int | None
    reason: str | None = None

    def __bool__(self):
        return self.index is not None


def finite_index(Lsub: Lattice, Lsup: Lattice) -> IndexResult:
    """Index of ``Lsub`` in ``Lsup``, or a reason (``NotContained``/``RankDrop``)."""
    if Lsub.dim != Lsup.dim:
        raise DimMismatch(f"ambient dims differ: {Lsub.dim} vs {Lsup.dim}")
    if not (Lsub.is_rational and Lsup.is_rational):
        raise NonRationalLattice("finite index is only defined for rational lattices here")
    A = Lsup.matrix()
    cols = []
    for v in Lsub.basis_vectors:
        x = intmat.solve_q(A, list(v.rational_entries())) if Lsup.rank else (None if not v.is_zero() else [])
        if x is None or any(t.denominator != 1 for t in x):
            return IndexResult(None, "NotContained")
        cols.append([int(t) for t in x])
    if Lsub.rank < Lsup.rank:
        return IndexResult(None, "RankDrop")
    if Lsup.rank == 0:
        return IndexResult(1)
    X = intmat.transpose(cols)
    idx = 1
    for d in intmat.invariant_factors(X):
        idx *= d
    return IndexResult(idx)


def annihilator(vectors: Sequence[ExactVector], q: int) -> tuple[ExactVector, ...]:
    """Rational basis of {xi : xi . v = 0 for all v} (rational vectors only)."""
    if any(not v.is_rational for v in vectors):
        raise NonRationalLattice("annihilator is computed for rational subspaces only")
    rows = [list(v.rational_entries()) for v in vectors]
    ns = intmat.nullspace_q(rows, q) if rows else [[Fraction(int(i == j)) for i in range(q)] for j in range(q)]
    return tuple(ExactVector.from_fractions(v) for v in ns)


def same_subspace(A: Sequence[ExactVector], B: Sequence[ExactVector], q: int) -> bool:
    vs = list(A) + list(B)
    if not vs:
        return True
    basis = common_basis(vs)
    A = [a.rebase(basis) for a in A]
    B = [b.rebase(basis) for b in B]
    ra, rb = _rank(A, q, basis), _rank(B, q, basis)
    return ra == rb == _rank(A + B, q, basis)


def dual_subgroup(C: ClosedSubgroup) -> ClosedSubgroup:
    """``{xi : xi(c) in Z for all c in C}`` for rational C, as a closed subgroup
    (discrete generators plus the annihilator of span(C))."""
    if not C.is_rational:
        raise NonRationalLattice("duality is only defined for rational subgroups here")
    q = C.dim
    dec = C.decomposition
    ann = annihilator(list(dec.span), q)
    gens = []
    W = [list(w.rational_entries()) for w in dec.cospan]
    L = [list(l.rational_entries()) for l in dec.discrete]
    for i in range(len(L)):
        rows = W + L
        rhs = [Fraction(0)] * len(W) + [Fraction(int(i == j)) for j in range(len(L))]
        x = intmat.solve_q(rows, rhs)
        gens.append(ExactVector.from_fractions(x))
    return ClosedSubgroup(q, tuple(gens), ann)


def describe(vs: Sequence[ExactVector]) -> list[str]:
    return [str(v) for v in vs]


__all__ = [
    "ClosedSubgroup", "Lattice", "Decomposition", "Discrete", "NonDiscrete", "IndexResult",
    "dual_lattice", "dual_subgroup", "span", "cospan", "is_discrete", "finite_index",
    "annihilator", "same_subspace", "smith_normal_form", "canonical_basis",
    "NotFullRank", "NonRationalLattice", "NotIndependent", "SymbolRelationError",
    "fraction_str",
]
