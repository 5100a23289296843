"""Exact scalars and vectors over a finite basis of real period symbols.

A value is a rational combination ``c_0 * 1 + c_1 * s_1 + ... + c_k * s_k`` where
the ``s_i`` are named real constants that the user asserts to be linearly
independent over Q. The assertion is recorded, never checked.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

Rational = Fraction


class ExactError(ValueError):
    pass


class BasisMismatch(ExactError):
    pass


def to_fraction(x) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings. Floats are refused."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ExactError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise ExactError(f"not a rational: {x!r}") from exc
    raise ExactError(f"not an exact rational: {x!r} ({type(x).__name__})")


def fraction_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Symbol:
    name: str
    approx: str
    rational: bool = False

    def __post_init__(self):
        digits = sum(ch.isdigit() for ch in self.approx.split("e")[0].split("E")[0])
        if not self.rational and digits < 30:
            raise ExactError(
                f"symbol {self.name!r}: approximation needs >= 30 significant digits")


@dataclass(frozen=True)
class PeriodBasis:
    symbols: tuple[Symbol, ...]
    note: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.symbols or self.symbols[0].name != "1" or not self.symbols[0].rational:
            raise ExactError("the first symbol of a PeriodBasis must be the rational unit '1'")
        names = [s.name for s in self.symbols]
        if len(set(names)) != len(names):
            raise ExactError(f"duplicate symbol names in {names}")
        for s in self.symbols[1:]:
            if s.rational:
                raise ExactError(f"symbol {s.name!r}: only the unit may be rational")

    @classmethod
    def rational(cls) -> "PeriodBasis":
        return cls((Symbol("1", "1", True),))

    @classmethod
    def with_symbols(cls, **approx: str) -> "PeriodBasis":
        """``PeriodBasis.with_symbols(a="3.14159...")`` - the unit is prepended."""
        syms = [Symbol("1", "1", True)] + [Symbol(k, v, False) for k, v in approx.items()]
        return cls(tuple(syms))

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.symbols)

    @property
    def is_rational(self) -> bool:
        return self.size == 1

    @property
    def assertion(self) -> str:
        irr = self.names[1:]
        if not irr:
            return ""
        return ("assumes 1, " + ", ".join(irr)
                + " are linearly independent over Q (asserted, not verified)")

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ExactError(f"unknown symbol {name!r}") from None

    def precision(self) -> int:
        """Decimal digits carried by the least precise irrational approximation."""
        digs = []
        for s in self.symbols[1:]:
            mant = s.approx.lower().split("e")[0]
            digs.append(sum(ch.isdigit() for ch in mant.lstrip("-+0.")))
        return min(digs) if digs else 50

    def approximations(self) -> list:
        with mpmath.workdps(self.precision() + 10):
            return [mpmath.mpf(s.approx) for s in self.symbols]

    def to_json(self) -> dict:
        return {"symbols": [{"name": s.name, "approx": s.approx, "rational": s.rational}
                            for s in self.symbols]}

    @classmethod
    def from_json(cls, data: dict | None) -> "PeriodBasis":
        if not data:
            return cls.rational()
        syms = tuple(Symbol(d["name"], str(d["approx"]), bool(d.get("rational", False)))
                     for d in data["symbols"])
        return cls(syms)

    def merge(self, other: "PeriodBasis") -> "PeriodBasis":
        if self == other:
            return self
        if other.is_rational:
            return self
        if self.is_rational:
            return other
        raise BasisMismatch(f"period bases differ: {self.names} vs {other.names}")


RATIONAL = PeriodBasis.rational()


@dataclass(frozen=True)
class ExactScalar:
    coeffs: tuple[Fraction, ...]
    basis: PeriodBasis = RATIONAL

    def __post_init__(self):
        if len(self.coeffs) != self.basis.size:
            raise ExactError("coefficient count does not match the basis")

    @classmethod
    def of(cls, x, basis: PeriodBasis = RATIONAL) -> "ExactScalar":
        if isinstance(x, ExactScalar):
            return x
        if isinstance(x, str) and not _looks_rational(x):
            return cls.symbol(x, basis)
        c = [Fraction(0)] * basis.size
        c[0] = to_fraction(x)
        return cls(tuple(c), basis)

    @classmethod
    def symbol(cls, name: str, basis: PeriodBasis, coeff=1) -> "ExactScalar":
        c = [Fraction(0)] * basis.size
        c[basis.index(name)] = to_fraction(coeff)
        return cls(tuple(c), basis)

    @classmethod
    def zero(cls, basis: PeriodBasis = RATIONAL) -> "ExactScalar":
        return cls((Fraction(0),) * basis.size, basis)

    def _check(self, other: "ExactScalar"):
        if self.basis != other.basis:
            raise BasisMismatch(f"period bases differ: {self.basis.names} vs {other.basis.names}")

    def __add__(self, other):
        other = ExactScalar.of(other, self.basis)
        self._check(other)
        return ExactScalar(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.basis)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar(tuple(-a for a in self.coeffs), self.basis)

    def __sub__(self, other):
        return self + (-ExactScalar.of(other, self.basis))

    def __rsub__(self, other):
        return ExactScalar.of(other, self.basis) - self

    def __mul__(self, k):
        k = to_fraction(k)
        return ExactScalar(tuple(a * k for a in self.coeffs), self.basis)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return self * (1 / to_fraction(k))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    @property
    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational:
            raise ExactError(f"{self} is not rational")
        return self.coeffs[0]

    def approx(self):
        vals = self.basis.approximations()
        with mpmath.workdps(self.basis.precision() + 10):
            return mpmath.fsum(mpmath.mpf(c.numerator) / c.denominator * v
                               for c, v in zip(self.coeffs, vals))

    def __float__(self):
        if self.is_rational:
            return float(self.coeffs[0])
        return float(self.approx())

    def to_json(self) -> list[str]:
        return [fraction_str(c) for c in self.coeffs]

    def __str__(self):
        terms = []
        for c, name in zip(self.coeffs, self.basis.names):
            if c == 0:
                continue
            if name == "1":
                terms.append(fraction_str(c))
            elif c == 1:
                terms.append(name)
            else:
                terms.append(f"{fraction_str(c)}*{name}")
        return " + ".join(terms) if terms else "0"


def _looks_rational(s: str) -> bool:
    try:
        Fraction(s.strip())
        return True
    except ValueError:
        return False


@dataclass(frozen=True)
class ExactVector:
    """A vector in R^q whose entries are ExactScalars sharing one basis.

    Stored as a q x s table of Fractions (row i = symbol expansion of entry i).
    """

    coeffs: tuple[tuple[Fraction, ...], ...]
    basis: PeriodBasis = RATIONAL

    def __post_init__(self):
        if not self.coeffs:
            raise ExactError("ExactVector needs ambient dimension >= 1")
        for row in self.coeffs:
            if len(row) != self.basis.size:
                raise ExactError("coefficient rows do not match the basis")

    @classmethod
    def of(cls, entries: Iterable, basis: PeriodBasis = RATIONAL) -> "ExactVector":
        rows = []
        for e in entries:
            if isinstance(e, ExactScalar):
                if e.basis != basis:
                    basis = basis.merge(e.basis)
                    e = _rebase(e, basis)
                rows.append(e.coeffs)
            elif isinstance(e, (list, tuple)):
                if len(e) != basis.size:
                    raise ExactError(f"entry {e!r} has {len(e)} coefficients, basis has {basis.size}")
                rows.append(tuple(to_fraction(c) for c in e))
            else:
                rows.append(ExactScalar.of(e, basis).coeffs)
        return cls(tuple(rows), basis)

    @classmethod
    def zeros(cls, q: int, basis: PeriodBasis = RATIONAL) -> "ExactVector":
        return cls(((Fraction(0),) * basis.size,) * q, basis)

    @classmethod
    def from_fractions(cls, values: Sequence, basis: PeriodBasis = RATIONAL) -> "ExactVector":
        z = (Fraction(0),) * (basis.size - 1)
        return cls(tuple((to_fraction(v),) + z for v in values), basis)

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    @property
    def entries(self) -> tuple[ExactScalar, ...]:
        return tuple(ExactScalar(row, self.basis) for row in self.coeffs)

    def __getitem__(self, i) -> ExactScalar:
        return ExactScalar(self.coeffs[i], self.basis)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return self.dim

    def _check(self, other: "ExactVector"):
        if self.dim != other.dim:
            raise DimMismatch(f"dimensions differ: {self.dim} vs {other.dim}")
        if self.basis != other.basis:
            raise BasisMismatch(f"period bases differ: {self.basis.names} vs {other.basis.names}")

    def __add__(self, other: "ExactVector") -> "ExactVector":
        self, other = align(self, other)
        self._check(other)
        return ExactVector(tuple(tuple(a + b for a, b in zip(r, s))
                                 for r, s in zip(self.coeffs, other.coeffs)), self.basis)

    def __neg__(self):
        return ExactVector(tuple(tuple(-a for a in r) for r in self.coeffs), self.basis)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, k):
        k = to_fraction(k)
        return ExactVector(tuple(tuple(a * k for a in r) for r in self.coeffs), self.basis)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.coeffs)

    @property
    def is_rational(self) -> bool:
        return all(not any(r[1:]) for r in self.coeffs)

    def rational_entries(self) -> tuple[Fraction, ...]:
        if not self.is_rational:
            raise ExactError("vector has irrational symbol components")
        return tuple(r[0] for r in self.coeffs)

    def flat(self) -> tuple[Fraction, ...]:
        """Symbol expansion as one rational vector of length q*s."""
        return tuple(c for r in self.coeffs for c in r)

    def approx(self) -> list:
        return [e.approx() for e in self.entries]

    def to_float(self) -> list[float]:
        return [float(e) for e in self.entries]

    def rebase(self, basis: PeriodBasis) -> "ExactVector":
        if basis == self.basis:
            return self
        return ExactVector(tuple(_rebase(e, basis).coeffs for e in self.entries), basis)

    def to_json(self) -> list[list[str]]:
        return [[fraction_str(c) for c in r] for r in self.coeffs]

    def __str__(self):
        return "(" + ", ".join(str(e) for e in self.entries) + ")"

    __repr__ = __str__


class DimMismatch(ExactError):
    pass


def _rebase(e: ExactScalar, basis: PeriodBasis) -> ExactScalar:
    if e.basis == basis:
        return e
    c = [Fraction(0)] * basis.size
    for coeff, name in zip(e.coeffs, e.basis.names):
        if coeff:
            c[basis.index(name)] += coeff
    return ExactScalar(tuple(c), basis)


def align(*vs: ExactVector):
    """Bring vectors onto a common basis (rational vectors lift to any basis)."""
    basis = vs[0].basis
    for v in vs[1:]:
        basis = basis.merge(v.basis)
    return tuple(v.rebase(basis) for v in vs)


def common_basis(vs: Sequence[ExactVector]) -> PeriodBasis:
    basis = RATIONAL
    for v in vs:
        basis = basis.merge(v.basis)
    return basis


def int_matvec(A: Sequence[Sequence[int]], v: ExactVector) -> ExactVector:
    q = v.dim
    if len(A) != q or any(len(row) != q for row in A):
        raise DimMismatch(f"matrix of shape {len(A)}x{len(A[0]) if A else 0} against dim {q}")
    s = v.basis.size
    out = []
    for row in A:
        out.append(tuple(sum((row[j] * v.coeffs[j][k] for j in range(q)), Fraction(0))
                         for k in range(s)))
    return ExactVector(tuple(out), v.basis)


def parse_vector(data, basis: PeriodBasis = RATIONAL) -> ExactVector:
    """JSON form: list of entries; an entry is a rational string/int, a symbol
    name, or a list of per-symbol rational coefficients."""
    return ExactVector.of(data, basis)
