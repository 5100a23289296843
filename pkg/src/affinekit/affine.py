"""Integral affine transformations ``x -> A x + u`` and finitely generated groups of them."""
from __future__ import annotations

import ast
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

from . import intmat
from .exact import (RATIONAL, DimMismatch, ExactError, ExactVector, PeriodBasis, align,
                    int_matvec, to_fraction)
from .lattice import ClosedSubgroup, Decomposition

IntMatrix = tuple[tuple[int, ...], ...]


class NotUnimodular(ExactError):
    pass


def _as_int_matrix(A) -> IntMatrix:
    rows = []
    for row in A:
        r = []
        for x in row:
            f = to_fraction(x)
            if f.denominator != 1:
                raise NotUnimodular(f"non-integer matrix entry {x!r}")
            r.append(int(f))
        rows.append(tuple(r))
    return tuple(rows)


def _identity(q: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(q)) for i in range(q))


@dataclass(frozen=True)
class AffineElement:
    u: ExactVector
    A: IntMatrix

    def __post_init__(self):
        A = _as_int_matrix(self.A)
        q = self.u.dim
        if len(A) != q or any(len(r) != q for r in A):
            raise DimMismatch(f"linear part is not {q}x{q}")
        if abs(intmat.det_int(A)) != 1:
            raise NotUnimodular(f"det {intmat.det_int(A)} is not +-1: {A}")
        object.__setattr__(self, "A", A)

    @classmethod
    def of(cls, u: Sequence, A: Sequence[Sequence[int]] | None = None,
           basis: PeriodBasis = RATIONAL) -> "AffineElement":
        u = u if isinstance(u, ExactVector) else ExactVector.of(u, basis)
        return cls(u, _identity(u.dim) if A is None else A)

    @classmethod
    def identity(cls, q: int, basis: PeriodBasis = RATIONAL) -> "AffineElement":
        return cls(ExactVector.zeros(q, basis), _identity(q))

    @property
    def dim(self) -> int:
        return self.u.dim

    @property
    def is_translation(self) -> bool:
        return self.A == _identity(self.dim)

    @property
    def is_identity(self) -> bool:
        return self.is_translation and self.u.is_zero()

    def rebase(self, basis: PeriodBasis) -> "AffineElement":
        return AffineElement(self.u.rebase(basis), self.A)

    def to_json(self) -> dict:
        return {"u": self.u.to_json(), "A": [list(r) for r in self.A]}

    def __str__(self):
        return f"({self.u}, {[list(r) for r in self.A]})"


def compose(g: AffineElement, h: AffineElement) -> AffineElement:
    """``g ∘ h``: ``(u_g + A_g u_h, A_g A_h)``."""
    if g.dim != h.dim:
        raise DimMismatch(f"dimensions differ: {g.dim} vs {h.dim}")
    gu, hu = align(g.u, h.u)
    return AffineElement(gu + int_matvec(g.A, hu), tuple(map(tuple, intmat.matmul(g.A, h.A))))


def invert(g: AffineElement) -> AffineElement:
    Ainv = intmat.inverse_unimodular(g.A)
    return AffineElement(-int_matvec(Ainv, g.u), tuple(map(tuple, Ainv)))


def act(g: AffineElement, x: ExactVector) -> ExactVector:
    if g.dim != x.dim:
        raise DimMismatch(f"dimensions differ: {g.dim} vs {x.dim}")
    u, x = align(g.u, x)
    return int_matvec(g.A, x) + u


def power(g: AffineElement, n: int) -> AffineElement:
    base = g if n >= 0 else invert(g)
    out = AffineElement.identity(g.dim, g.u.basis)
    for _ in range(abs(n)):
        out = compose(out, base)
    return out


# ---------------------------------------------------------------------------
# closed forms: exponent tuples -> elements

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def eval_poly(expr: str, env: Mapping[str, Fraction]) -> Fraction:
    """Evaluate ``+ - * / **`` expressions over exact rationals."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return Fraction(node.value)
        if isinstance(node, ast.Name):
            if node.id not in env:
                raise ExactError(f"unknown variable {node.id!r} in {expr!r}")
            return Fraction(env[node.id])
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Pow):
                if right.denominator != 1 or right < 0:
                    raise ExactError(f"only non-negative integer powers allowed in {expr!r}")
                return left ** int(right)
            return _BINOPS[type(node.op)](left, right)
        raise ExactError(f"unsupported syntax in closed form {expr!r}")

    return ev(ast.parse(str(expr), mode="eval"))


@dataclass(frozen=True)
class ClosedForm:
    """Normal form ``g_1^{e_1} ... g_k^{e_k} -> (u(e), A(e))``.

    ``u`` entries are expressions (or per-symbol lists of expressions) in the
    exponent variables; ``A`` entries are integer-valued expressions.
    """

    exponents: tuple[str, ...]
    u: tuple
    A: tuple

    def evaluate(self, exps: Sequence[int], basis: PeriodBasis = RATIONAL) -> AffineElement:
        env = dict(zip(self.exponents, (Fraction(e) for e in exps)))
        entries = []
        for e in self.u:
            if isinstance(e, (list, tuple)):
                entries.append([eval_poly(c, env) for c in e])
            else:
                entries.append(eval_poly(e, env))
        u = ExactVector.of(entries, basis)
        A = tuple(tuple(eval_poly(c, env) for c in row) for row in self.A)
        return AffineElement(u, A)

    def to_json(self) -> dict:
        return {"exponents": list(self.exponents), "u": [list(x) if isinstance(x, tuple) else x for x in self.u],
                "A": [list(r) for r in self.A]}

    @classmethod
    def from_json(cls, data: dict) -> "ClosedForm":
        u = tuple(tuple(x) if isinstance(x, list) else str(x) for x in data["u"])
        return cls(tuple(data["exponents"]), u, tuple(tuple(str(c) for c in r) for r in data["A"]))


# ---------------------------------------------------------------------------
# presentations

Word = tuple[tuple[str, int], ...]


def word_str(word: Word) -> str:
    if not word:
        return "e"
    return " ".join(name if s == 1 else f"{name}^-1" for name, s in word)


def parse_word(text: str) -> Word:
    text = text.strip()
    if text in ("", "e", "id"):
        return ()
    out = []
    for tok in text.split():
        name, _, exp = tok.partition("^")
        try:
            n = int(exp) if exp else 1
        except ValueError:
            raise ExactError(f"bad exponent in word token {tok!r}") from None
        out.extend([(name, 1 if n > 0 else -1)] * abs(n))
    return tuple(out)


@dataclass(frozen=True)
class GroupPresentation:
    dim: int
    generators: tuple[tuple[str, AffineElement], ...]
    closed_form: ClosedForm | None = None
    word_bound: int = 8

    def __post_init__(self):
        gens = tuple(self.generators.items()) if isinstance(self.generators, Mapping) else tuple(self.generators)
        if gens:
            us = align(*(g.u for _, g in gens))
            gens = tuple((n, AffineElement(u, g.A)) for (n, g), u in zip(gens, us))
        for name, g in gens:
            if g.dim != self.dim:
                raise DimMismatch(f"generator {name!r} has dim {g.dim}, expected {self.dim}")
        if len({n for n, _ in gens}) != len(gens):
            raise ExactError("duplicate generator names")
        if self.word_bound < 1:
            raise ValueError("word_bound must be positive")
        object.__setattr__(self, "generators", gens)

    @property
    def basis(self) -> PeriodBasis:
        return self.generators[0][1].u.basis if self.generators else RATIONAL

    def generator(self, name: str) -> AffineElement:
        for n, g in self.generators:
            if n == name:
                return g
        raise KeyError(f"unknown generator {name!r}")

    def evaluate(self, word: Word | str) -> AffineElement:
        if isinstance(word, str):
            word = parse_word(word)
        out = AffineElement.identity(self.dim, self.basis)
        for name, s in word:
            g = self.generator(name)
            out = compose(out, g if s == 1 else invert(g))
        return out

    def with_bound(self, bound: int) -> "GroupPresentation":
        return GroupPresentation(self.dim, self.generators, self.closed_form, bound)

    def to_json(self) -> dict:
        out = {"dim": self.dim, "word_bound": self.word_bound,
               "generators": {n: g.to_json() for n, g in self.generators}}
        if self.closed_form:
            out["closed_form"] = self.closed_form.to_json()
        if not self.basis.is_rational:
            out["basis"] = self.basis.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GroupPresentation":
        basis = PeriodBasis.from_json(data.get("basis"))
        q = int(data["dim"])
        gens = []
        for name, g in data["generators"].items():
            A = g.get("A", [[int(i == j) for j in range(q)] for i in range(q)])
            gens.append((name, AffineElement.of(g["u"], A, basis)))
        cf = ClosedForm.from_json(data["closed_form"]) if data.get("closed_form") else None
        return cls(q, tuple(gens), cf, int(data.get("word_bound", 8)))


@dataclass(frozen=True)
class WordElement:
    word: Word
    element: AffineElement

    def __str__(self):
        return f"{word_str(self.word)} = {self.element}"


def enumerate_words(P: GroupPresentation, bound: int | None = None) -> list[WordElement]:
    """Distinct elements of word length <= bound, each with a shortest word.

    Breadth-first over reduced words; a word whose element was already reached
    is not extended (its extensions are reachable from the earlier word).
    """
    bound = P.word_bound if bound is None else bound
    letters = [(n, s) for n, _ in P.generators for s in (1, -1)]
    elems = {n: g for n, g in P.generators}
    inv = {n: invert(g) for n, g in P.generators}
    ident = AffineElement.identity(P.dim, P.basis)
    seen = {ident: ()}
    out = [WordElement((), ident)]
    frontier = [((), ident)]
    for _ in range(bound):
        nxt = []
        for word, el in frontier:
            for name, s in letters:
                if word and word[-1] == (name, -s):
                    continue
                new = compose(el, elems[name] if s == 1 else inv[name])
                if new in seen:
                    continue
                w = word + ((name, s),)
                seen[new] = w
                out.append(WordElement(w, new))
                nxt.append((w, new))
        frontier = nxt
        if not frontier:
            break
    return out


def closed_form_elements(P: GroupPresentation, radius: int | None = None) -> dict[AffineElement, tuple[int, ...]]:
    if P.closed_form is None:
        raise ValueError("presentation has no closed form")
    radius = P.word_bound if radius is None else radius
    k = len(P.closed_form.exponents)
    out = {}
    for exps in product(range(-radius, radius + 1), repeat=k):
        el = P.closed_form.evaluate(exps, P.basis)
        out.setdefault(el, exps)
    return out


def closed_form_mismatches(P: GroupPresentation, bound: int | None = None) -> list[WordElement]:
    """Enumerated elements that the closed form does not produce (empty = agreement)."""
    words = enumerate_words(P, bound)
    table = closed_form_elements(P, P.word_bound if bound is None else bound)
    return [w for w in words if w.element not in table]


@dataclass(frozen=True)
class GroupAnalysis:
    linear_part_generators: tuple[IntMatrix, ...]
    translational_part: ClosedSubgroup
    translational_rank: int
    exhaustive: bool
    generator_translational_part: ClosedSubgroup
    generator_translational_rank: int
    element_count: int
    notes: tuple[str, ...] = ()

    @property
    def translational_basis(self):
        return self.translational_part.decomposition.discrete

    @property
    def discrepancy(self) -> bool:
        """Generator-level and word-level translational parts disagree."""
        return self.generator_translational_rank != self.translational_rank

    def to_json(self) -> dict:
        dec: Decomposition = self.translational_part.decomposition
        gdec: Decomposition = self.generator_translational_part.decomposition
        return {
            "translational_rank": self.translational_rank,
            "translational_basis": [v.to_json() for v in dec.discrete],
            "translational_cospan": [v.to_json() for v in dec.cospan],
            "linear_parts": [[list(r) for r in A] for A in self.linear_part_generators],
            "exhaustive": self.exhaustive,
            "generator_translational_rank": self.generator_translational_rank,
            "generator_translational_basis": [v.to_json() for v in gdec.discrete],
            "translational_discrepancy": self.discrepancy,
            "elements_examined": self.element_count,
            "notes": list(self.notes),
        }


def _translation_subgroup(q: int, elements: Iterable[AffineElement]) -> ClosedSubgroup:
    seen = []
    for g in elements:
        if g.is_translation and not g.u.is_zero() and g.u not in seen:
            seen.append(g.u)
    return ClosedSubgroup(q, tuple(seen))


def analyze(P: GroupPresentation) -> GroupAnalysis:
    notes = []
    if P.closed_form is not None:
        elements = list(closed_form_elements(P))
        exhaustive = True
        notes.append(f"closed form evaluated on exponents |e| <= {P.word_bound}")
    else:
        words = enumerate_words(P, P.word_bound + 1)
        inner = [w for w in words if len(w.word) <= P.word_bound]
        exhaustive = len(inner) == len(words)
        elements = [w.element for w in inner]
        if not exhaustive:
            notes.append(f"bounded word search (length <= {P.word_bound}); translational part "
                         "may be under-approximated")
    lin = sorted({g.A for g in elements})
    tr = _translation_subgroup(P.dim, elements)
    gtr = _translation_subgroup(P.dim, (g for _, g in P.generators))
    rank = tr.decomposition.discrete_rank
    grank = gtr.decomposition.discrete_rank
    if rank != grank:
        notes.append(f"generator-level translational rank {grank} differs from word-level rank {rank}")
    if P.basis.assertion:
        notes.append(P.basis.assertion)
    return GroupAnalysis(tuple(lin), tr, rank, exhaustive, gtr, grank, len(elements), tuple(notes))


def isotropy(P: GroupPresentation, x: ExactVector, bound: int | None = None) -> list[WordElement]:
    return [w for w in enumerate_words(P, bound) if act(w.element, x) == x.rebase(w.element.u.basis.merge(x.basis))]


COMPACTNESS_TYPES = ("proper", "s-proper", "strong-proper", "strong-s-proper")


def classify_linear_model(gamma_finite: bool, S_compact: bool, pi1_S_finite: bool) -> frozenset[str]:
    """Compactness types of the linear local model; it is never of compact type."""
    out = set()
    if gamma_finite:
        out.add("proper")
        if S_compact:
            out.add("s-proper")
    if pi1_S_finite:
        out.add("strong-proper")
        if S_compact:
            out.add("strong-s-proper")
    return frozenset(out)
