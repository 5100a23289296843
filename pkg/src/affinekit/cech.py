"""Čech cochains of local systems on finite nerves.

Simplices are stored as increasing tuples of vertex indices. A ``p``-cochain
takes values in the stalk of the *last* vertex of each simplex, and the
coboundary twists only the last face:

    (δc)(v_0..v_{p+1}) = Σ_{i<=p} (-1)^i c(v_0..v̂_i..v_{p+1})
                         + (-1)^{p+1} M(v_p -> v_{p+1}) c(v_0..v_p)

where ``M(a -> b)`` is the edge monodromy carrying the stalk at ``a`` to the
stalk at ``b``. Flatness (``M(b->c) M(a->b) = M(a->c)`` on triangles) gives
``δδ = 0``. Torus values are rationals reduced into ``[0, 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from . import intmat
from .exact import ExactError, to_fraction

RINGS = ("Z", "R", "T")
MAX_DIM = 3


class CechError(ExactError):
    pass


class MissingSimplex(CechError):
    pass


class NotFlat(CechError):
    pass


class NotACocycle(CechError):
    pass


class LiftInconsistent(CechError):
    pass


class UnsupportedCoefficients(CechError):
    pass


Simplex = tuple[int, ...]


@dataclass
class Nerve:
    vertices: tuple[str, ...]
    simplices: dict[int, list[Simplex]] = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = tuple(self.vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise CechError("duplicate vertex names")
        sims: dict[int, set] = {0: {(i,) for i in range(len(self.vertices))}}
        for p, lst in self.simplices.items():
            p = int(p)
            if p < 0 or p > MAX_DIM:
                raise CechError(f"simplex dimension {p} outside 0..{MAX_DIM}")
            for s in lst:
                s = tuple(self._index(v) for v in s)
                if len(s) != p + 1:
                    raise CechError(f"{p}-simplex {s} has {len(s)} vertices")
                if len(set(s)) != len(s):
                    raise CechError(f"repeated vertex in simplex {s}")
                sims.setdefault(p, set()).add(tuple(sorted(s)))
        top = max(sims)
        for p in range(top, 0, -1):
            for s in sims.get(p, ()):
                for f in faces(s):
                    if f not in sims.get(p - 1, set()):
                        raise MissingSimplex(f"face {self.label(f)} of {self.label(s)} is not listed")
        self.simplices = {p: sorted(sims.get(p, ())) for p in range(MAX_DIM + 1)}
        self._pos = {s: i for p in self.simplices for i, s in enumerate(self.simplices[p])}

    def _index(self, v) -> int:
        if isinstance(v, int) and not isinstance(v, bool):
            if not 0 <= v < len(self.vertices):
                raise CechError(f"vertex index {v} out of range")
            return v
        try:
            return self.vertices.index(str(v))
        except ValueError:
            raise CechError(f"unknown vertex {v!r}") from None

    def count(self, p: int) -> int:
        return len(self.simplices.get(p, ()))

    def position(self, s: Simplex) -> int:
        try:
            return self._pos[s]
        except KeyError:
            raise MissingSimplex(f"simplex {self.label(s)} is not in the nerve") from None

    def label(self, s: Simplex) -> str:
        return ",".join(self.vertices[i] for i in s)

    @property
    def dim(self) -> int:
        return max((p for p in self.simplices if self.simplices[p]), default=0)

    @classmethod
    def from_json(cls, data: Mapping) -> "Nerve":
        return cls(tuple(map(str, data["vertices"])), {int(k): v for k, v in data.get("simplices", {}).items()})

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices),
                "simplices": {str(p): [[self.vertices[i] for i in s] for s in self.simplices[p]]
                              for p in range(1, MAX_DIM + 1) if self.simplices[p]}}


def faces(s: Simplex) -> list[Simplex]:
    return [s[:i] + s[i + 1:] for i in range(len(s))]


def full_simplex(n: int, names: Sequence[str] | None = None, boundary: bool = False) -> Nerve:
    """The ``(n-1)``-simplex on ``n`` vertices, or its boundary."""
    names = tuple(names or (f"v{i}" for i in range(n)))
    top = n - 2 if boundary else n - 1
    return Nerve(names, {p: [c for c in combinations(range(n), p + 1)] for p in range(1, min(top, MAX_DIM) + 1)})


def circle(n: int = 3) -> Nerve:
    return Nerve(tuple(f"v{i}" for i in range(n)), {1: [tuple(sorted((i, (i + 1) % n))) for i in range(n)]})


def torus7() -> Nerve:
    """The seven-vertex triangulation of the torus."""
    tri = [(i, (i + 1) % 7, (i + 3) % 7) for i in range(7)] + [(i, (i + 2) % 7, (i + 3) % 7) for i in range(7)]
    edges = {tuple(sorted(e)) for t in tri for e in combinations(t, 2)}
    return Nerve(tuple(f"v{i}" for i in range(7)), {1: sorted(edges), 2: [tuple(sorted(t)) for t in tri]})


# ---------------------------------------------------------------------------
# local systems


def _identity(r: int):
    return tuple(tuple(int(i == j) for j in range(r)) for i in range(r))


def _int_matrix(M, r: int):
    rows = tuple(tuple(int(to_fraction(x)) for x in row) for row in M)
    if len(rows) != r or any(len(row) != r for row in rows):
        raise CechError(f"monodromy is not {r}x{r}")
    if any(to_fraction(x).denominator != 1 for row in M for x in row):
        raise CechError("monodromy must be an integer matrix")
    if abs(intmat.det_int(rows)) != 1:
        raise CechError(f"monodromy {rows} is not in GL_{r}(Z)")
    return rows


@dataclass
class LocalSystem:
    """Rank-``r`` system; ``monodromy[(a, b)]`` (``a < b``) carries stalk ``a`` to stalk ``b``.

    Missing edges carry the identity; the reversed edge carries the inverse.
    """

    nerve: Nerve
    rank: int = 1
    monodromy: dict[tuple[int, int], tuple] = field(default_factory=dict)
    ring: str = "Z"

    def __post_init__(self):
        if self.ring not in RINGS:
            raise CechError(f"coefficient ring must be one of {RINGS}")
        mono = {}
        edges = set(self.nerve.simplices[1])
        for (a, b), M in dict(self.monodromy).items():
            a, b = self.nerve._index(a), self.nerve._index(b)
            M = _int_matrix(M, self.rank)
            if a > b:
                a, b, M = b, a, tuple(map(tuple, intmat.inverse_unimodular(M)))
            if (a, b) not in edges:
                raise MissingSimplex(f"monodromy given on {self.nerve.label((a, b))}, which is not an edge")
            mono[(a, b)] = M
        self.monodromy = mono
        for a, b, c in self.nerve.simplices[2]:
            lhs = intmat.matmul(self.transport(b, c), self.transport(a, b))
            if lhs != [list(r) for r in self.transport(a, c)]:
                raise NotFlat(f"monodromy is not flat on {self.nerve.label((a, b, c))}")

    def transport(self, a: int, b: int):
        if a < b:
            return self.monodromy.get((a, b), _identity(self.rank))
        M = self.monodromy.get((b, a))
        return _identity(self.rank) if M is None else tuple(map(tuple, intmat.inverse_unimodular(M)))

    def with_ring(self, ring: str) -> "LocalSystem":
        return LocalSystem(self.nerve, self.rank, dict(self.monodromy), ring)

    @classmethod
    def trivial(cls, nerve: Nerve, rank: int = 1, ring: str = "Z") -> "LocalSystem":
        return cls(nerve, rank, {}, ring)

    @classmethod
    def from_json(cls, nerve: Nerve, data: Mapping) -> "LocalSystem":
        mono = {}
        for key, M in data.get("monodromy", {}).items():
            a, b = (k.strip() for k in key.replace("->", ",").split(","))
            mono[(a, b)] = M
        return cls(nerve, int(data.get("rank", 1)), mono, data.get("ring", "Z"))

    def to_json(self) -> dict:
        return {"rank": self.rank, "ring": self.ring,
                "monodromy": {self.nerve.label(e): [list(r) for r in M] for e, M in self.monodromy.items()}}


# ---------------------------------------------------------------------------
# cochains


def _reduce(x, ring: str):
    if ring == "T":
        if isinstance(x, Fraction):
            return x - (x.numerator // x.denominator)
        return x % 1.0
    return x


@dataclass(frozen=True)
class Cochain:
    """Values per increasing ``p``-simplex, as a flat tuple of length ``N_p·r``."""

    degree: int
    values: tuple
    rank: int = 1
    ring: str = "Z"

    def __post_init__(self):
        vals = tuple(_reduce(self._coerce(v), self.ring) for v in self.values)
        if len(vals) % self.rank:
            raise CechError("cochain length is not a multiple of the rank")
        object.__setattr__(self, "values", vals)

    def _coerce(self, v):
        if isinstance(v, float):
            if self.ring == "Z":
                raise UnsupportedCoefficients("integer cochains take integer values")
            return v
        f = to_fraction(v)
        if self.ring == "Z":
            if f.denominator != 1:
                raise UnsupportedCoefficients(f"value {v!r} is not an integer")
            return int(f)
        return f

    @classmethod
    def zero(cls, nerve: Nerve, degree: int, rank: int = 1, ring: str = "Z") -> "Cochain":
        return cls(degree, (0,) * (nerve.count(degree) * rank), rank, ring)

    @classmethod
    def from_mapping(cls, nerve: Nerve, degree: int, values: Mapping, rank: int = 1, ring: str = "Z",
                     default=None) -> "Cochain":
        """Build from ``{simplex (names or indices): value or r-vector}``; missing simplices
        take ``default`` (``MissingSimplex`` if no default)."""
        out = [None] * nerve.count(degree)
        for key, v in values.items():
            if isinstance(key, str):
                key = key.split(",")
            s = tuple(nerve._index(k.strip() if isinstance(k, str) else k) for k in key)
            if tuple(sorted(s)) != s:
                raise CechError(f"simplex {key} must be given in increasing vertex order")
            v = list(v) if isinstance(v, (list, tuple)) else [v]
            if len(v) != rank:
                raise CechError(f"value on {key} has {len(v)} components, rank is {rank}")
            out[nerve.position(s)] = v
        flat = []
        for i, v in enumerate(out):
            if v is None:
                if default is None:
                    raise MissingSimplex(f"no value on {nerve.label(nerve.simplices[degree][i])}")
                v = [default] * rank
            flat.extend(v)
        return cls(degree, tuple(flat), rank, ring)

    def at(self, nerve: Nerve, s: Simplex) -> tuple:
        i = nerve.position(s)
        return self.values[i * self.rank:(i + 1) * self.rank]

    def __add__(self, other: "Cochain") -> "Cochain":
        if (self.degree, self.rank, len(self.values)) != (other.degree, other.rank, len(other.values)):
            raise CechError("cochains are not compatible")
        ring = self.ring if self.ring == other.ring else "R"
        return Cochain(self.degree, tuple(a + b for a, b in zip(self.values, other.values)), self.rank, ring)

    def scale(self, k) -> "Cochain":
        return Cochain(self.degree, tuple(k * a for a in self.values), self.rank, self.ring)

    def lift(self) -> "Cochain":
        """Same values viewed as real (rational) numbers."""
        return Cochain(self.degree, self.values, self.rank, "R")

    def equal_mod_z(self, other: "Cochain") -> bool:
        return all(is_integral(a - b) for a, b in zip(self.values, other.values)) and \
            len(self.values) == len(other.values)

    def to_json(self, nerve: Nerve) -> dict:
        out = {}
        for i, s in enumerate(nerve.simplices[self.degree]):
            out[nerve.label(s)] = [_json_number(x) for x in self.values[i * self.rank:(i + 1) * self.rank]]
        return {"degree": self.degree, "rank": self.rank, "ring": self.ring, "values": out}


def _json_number(x):
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


def is_integral(x) -> bool:
    if isinstance(x, float):
        raise UnsupportedCoefficients("floating-point torus values cannot be tested exactly")
    return Fraction(x).denominator == 1


def face_terms(nerve: Nerve, sys: LocalSystem, s: Simplex):
    """``(sign, face, matrix or None)`` for each term of ``(δc)(s)``."""
    p = len(s) - 2
    out = []
    for i, f in enumerate(faces(s)):
        sign = -1 if i % 2 else 1
        if i == p + 1:
            out.append((sign, f, sys.transport(s[-2], s[-1])))
        else:
            out.append((sign, f, None))
    return out


def coboundary_matrix(nerve: Nerve, sys: LocalSystem, p: int) -> list[list[int]]:
    """Integer matrix of ``δ_p : C^p -> C^{p+1}`` (rows ``N_{p+1}·r``, columns ``N_p·r``)."""
    r = sys.rank
    rows_n, cols_n = nerve.count(p + 1) * r, nerve.count(p) * r
    D = [[0] * cols_n for _ in range(rows_n)]
    for si, s in enumerate(nerve.simplices.get(p + 1, ())):
        for sign, f, M in face_terms(nerve, sys, s):
            fi = nerve.position(f)
            for a in range(r):
                for b in range(r):
                    m = (a == b) if M is None else M[a][b]
                    if m:
                        D[si * r + a][fi * r + b] += sign * m
    return D


def coboundary(c: Cochain, sys: LocalSystem, nerve: Nerve | None = None) -> Cochain:
    nerve = nerve or sys.nerve
    r = sys.rank
    p = c.degree
    if c.rank != r:
        raise CechError(f"cochain rank {c.rank} differs from system rank {r}")
    if len(c.values) != nerve.count(p) * r:
        raise MissingSimplex(f"cochain covers {len(c.values) // r} of {nerve.count(p)} {p}-simplices")
    out = []
    for s in nerve.simplices.get(p + 1, ()):
        acc = [0] * r
        for sign, f, M in face_terms(nerve, sys, s):
            v = c.at(nerve, f)
            if M is not None:
                v = [sum((M[a][b] * v[b] for b in range(r)), 0) for a in range(r)]
            for a in range(r):
                acc[a] += sign * v[a]
        out.extend(acc)
    return Cochain(p + 1, tuple(out), r, c.ring)


# ---------------------------------------------------------------------------
# integral cohomology


@dataclass(frozen=True)
class CohomologyGroup:
    degree: int
    free_rank: int
    torsion: tuple[int, ...]

    def to_json(self) -> dict:
        return {"degree": self.degree, "free_rank": self.free_rank, "torsion": list(self.torsion)}


def _snf_rank(M) -> tuple[int, list[int]]:
    if not M or not M[0]:
        return 0, []
    f = intmat.invariant_factors(M)
    return len(f), f


def cohomology(nerve: Nerve, sys: LocalSystem, p: int) -> CohomologyGroup:
    """``H^p = ker δ_p / im δ_{p-1}`` with integer coefficients, via Smith normal form."""
    if not 0 <= p <= MAX_DIM:
        raise CechError(f"degree must be in 0..{MAX_DIM}")
    n = nerve.count(p) * sys.rank
    rk_out, _ = _snf_rank(coboundary_matrix(nerve, sys, p)) if nerve.count(p + 1) else (0, [])
    rk_in, fac = _snf_rank(coboundary_matrix(nerve, sys, p - 1)) if p > 0 else (0, [])
    return CohomologyGroup(p, n - rk_out - rk_in, tuple(d for d in fac if d > 1))


# ---------------------------------------------------------------------------
# Dixmier-Douady cocycles


def _rational_values(c: Cochain) -> list[Fraction]:
    if any(isinstance(x, float) for x in c.values):
        raise UnsupportedCoefficients("exact decisions need rational torus values")
    return [Fraction(x) for x in c.values]


def dd_cocycle_check(c: Cochain, sys: LocalSystem, nerve: Nerve | None = None) -> bool:
    """``δc ≡ 0 mod Z^r`` on every 3-simplex."""
    nerve = nerve or sys.nerve
    if c.degree != 2:
        raise CechError("expected a 2-cochain")
    _rational_values(c)
    return all(is_integral(x) for x in coboundary(c.lift(), sys, nerve).values)


def triple_product(lift: Cochain, sys: LocalSystem, nerve: Nerve | None = None) -> Cochain:
    """``c_ijk = g̃_ij g̃_jk g̃_ki`` written additively: the coboundary of the lift, reduced mod Z."""
    d = coboundary(lift.lift(), sys, nerve)
    return Cochain(2, d.values, d.rank, "T")


@dataclass
class _SNF:
    U: list
    V: list
    diag: list[int]
    rank: int


def _snf(nerve: Nerve, sys: LocalSystem, p: int) -> _SNF:
    D = coboundary_matrix(nerve, sys, p)
    m = len(D)
    n = nerve.count(p) * sys.rank
    if m == 0 or n == 0:
        return _SNF(intmat.identity(m), intmat.identity(n), [], 0)
    U, S, V = intmat.smith_normal_form(D)
    diag = [S[i][i] for i in range(min(m, n)) if S[i][i]]
    return _SNF(U, V, diag, len(diag))


def dd_trivialize(c: Cochain, sys: LocalSystem, nerve: Nerve | None = None) -> Cochain | None:
    """A torus 1-cochain ``λ`` with ``δλ ≡ c mod Z^r``, or None when ``c`` is not trivial.

    Solves ``δλ = c + z`` (``λ`` rational, ``z`` integral) through the Smith
    form ``U δ V = S``: with ``μ = V^{-1} λ`` the system reads ``S μ ≡ U c``,
    solvable iff ``(U c)_i`` is an integer for every ``i >= rank δ``.
    """
    nerve = nerve or sys.nerve
    if not dd_cocycle_check(c, sys, nerve):
        raise NotACocycle("c is not a cocycle mod Z")
    vals = _rational_values(c)
    F = _snf(nerve, sys, 1)
    Uc = intmat.matvec(F.U, vals) if F.U else []
    if any(Fraction(x).denominator != 1 for x in Uc[F.rank:]):
        return None
    n = nerve.count(1) * sys.rank
    mu = [Fraction(Uc[i]) / F.diag[i] if i < F.rank else Fraction(0) for i in range(n)]
    lam = intmat.matvec(F.V, mu) if n else []
    return Cochain(1, tuple(lam), sys.rank, "T")


def dd_class(c: Cochain, sys: LocalSystem, nerve: Nerve | None = None) -> tuple[Fraction, ...]:
    """Coordinates of ``[c]`` in ``(R/Z)^{N_2 r - rank δ_1}``; zero iff ``c`` is trivial."""
    nerve = nerve or sys.nerve
    vals = _rational_values(c)
    F = _snf(nerve, sys, 1)
    Uc = intmat.matvec(F.U, vals)
    return tuple(_reduce(Fraction(x), "T") for x in Uc[F.rank:])


# ---------------------------------------------------------------------------
# Chern classes of torus transition data


@dataclass(frozen=True)
class TransitionLift:
    """Real lift of torus transition functions ``g_ij``.

    ``base`` is a lift per edge; ``shifts[(edge, triangle)]`` is an integer
    vector added to the lift of ``edge`` on the triple overlap ``triangle``
    (a lift of a non-constant ``g_ij`` may wind between triple overlaps).
    """

    base: Cochain
    shifts: Mapping[tuple[Simplex, Simplex], tuple[int, ...]] = field(default_factory=dict)

    def value(self, nerve: Nerve, edge: Simplex, tri: Simplex) -> list:
        v = list(self.base.at(nerve, edge))
        s = self.shifts.get((edge, tri))
        if s is not None:
            v = [a + int(b) for a, b in zip(v, s)]
        return v

    def shifted(self, n: Cochain) -> "TransitionLift":
        """The lift changed by an integer 1-cochain ``n`` (another lift of the same ``g``)."""
        return TransitionLift(self.base.lift() + n.lift(), self.shifts)

    def scale(self, k: int) -> "TransitionLift":
        return TransitionLift(self.base.scale(k),
                              {key: tuple(k * x for x in v) for key, v in self.shifts.items()})


def lift_coboundary(lift: TransitionLift, sys: LocalSystem, nerve: Nerve | None = None) -> Cochain:
    """``δ(g̃)`` evaluated triangle by triangle with the lift valid on that overlap."""
    nerve = nerve or sys.nerve
    r = sys.rank
    out = []
    for t in nerve.simplices[2]:
        acc = [Fraction(0)] * r
        for sign, f, M in face_terms(nerve, sys, t):
            v = lift.value(nerve, f, t)
            if M is not None:
                v = [sum((M[a][b] * v[b] for b in range(r)), 0) for a in range(r)]
            for a in range(r):
                acc[a] += sign * v[a]
        if any(isinstance(x, float) for x in acc):
            raise UnsupportedCoefficients("Chern classes need rational lifts")
        if any(Fraction(x).denominator != 1 for x in acc):
            raise LiftInconsistent(f"δ(lift) is not integral on {nerve.label(t)}")
        out.extend(int(x) for x in acc)
    return Cochain(2, tuple(out), r, "Z")


@dataclass(frozen=True)
class CohomologyClass:
    free: tuple[int, ...]
    torsion: tuple[tuple[int, int], ...]

    @property
    def is_zero(self) -> bool:
        return not any(self.free) and not any(v for v, _ in self.torsion)

    def to_json(self) -> dict:
        return {"free": list(self.free), "torsion": [{"value": v, "modulus": m} for v, m in self.torsion]}


def integral_class(z: Cochain, sys: LocalSystem, nerve: Nerve | None = None) -> CohomologyClass:
    """Coordinates of an integer 2-cocycle in ``H^2(nerve; Z^r)``.

    Torsion coordinates are ``(U z)_i mod d_i``; free coordinates are taken in
    the Hermite basis of the image of ``ker δ_2`` in ``Z^{N_2 r}/sat(im δ_1)``.
    """
    nerve = nerve or sys.nerve
    if z.degree != 2 or z.ring != "Z":
        raise CechError("expected an integer 2-cochain")
    if nerve.count(3) and any(coboundary(z, sys, nerve).values):
        raise NotACocycle("integer cochain is not a cocycle")
    vals = list(z.values)
    F = _snf(nerve, sys, 1)
    Uz = intmat.matvec(F.U, vals)
    torsion = tuple((Uz[i] % d, d) for i, d in enumerate(F.diag) if d > 1)
    n2 = len(vals)
    if nerve.count(3):
        D2 = coboundary_matrix(nerve, sys, 2)
        K = intmat.saturate_columns(intmat.transpose(intmat.nullspace_q(D2, n2)) or [[] for _ in range(n2)])
    else:
        K = intmat.identity(n2)
    kcols = intmat.transpose(K)
    images = [intmat.matvec(F.U, col)[F.rank:] for col in kcols]
    H = intmat.hermite_normal_form(images) if images else []
    target = Uz[F.rank:]
    if not H:
        return CohomologyClass((), torsion)
    coords = intmat.solve_q(intmat.transpose(H), target)
    if coords is None or any(Fraction(x).denominator != 1 for x in coords):
        raise NotACocycle("cocycle does not lie in the kernel lattice")
    return CohomologyClass(tuple(int(x) for x in coords), torsion)


def chern_class(lift: TransitionLift, sys: LocalSystem, nerve: Nerve | None = None) -> CohomologyClass:
    """Class of the integer cocycle ``δ(g̃)`` in ``H^2(nerve; Z^r)``."""
    return integral_class(lift_coboundary(lift, sys, nerve), sys, nerve)
