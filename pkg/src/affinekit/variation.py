"""Linear variation of the leafwise symplectic class, monodromy groups, and
the mesh integrals used as numeric oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import intmat, kernels
from .affine import AffineElement
from .exact import RATIONAL, DimMismatch, ExactError, ExactScalar, ExactVector, PeriodBasis, align
from .lattice import ClosedSubgroup, Discrete, IndexResult, Lattice, finite_index, is_discrete


class SubsetViolation(ExactError):
    pass


class InconsistentGrid(ValueError):
    pass


@dataclass(frozen=True)
class LeafModel:
    """Chern vectors ``c_1..c_q`` in ``Z^h`` and the base class ``ω0`` in ``R^h``.

    ``positive_classes`` are homology classes that a symplectic class must pair
    positively with; it is the only cone test offered.
    """

    transverse_dim: int
    h2_rank: int
    chern: tuple[tuple[int, ...], ...]
    omega0: ExactVector
    positive_classes: tuple[tuple[Fraction, ...], ...] = ()

    def __post_init__(self):
        if self.transverse_dim < 1:
            raise ExactError("transverse dimension must be >= 1")
        chern = []
        for c in self.chern:
            row = []
            for x in c:
                f = Fraction(x)
                if f.denominator != 1:
                    raise ExactError(f"Chern vector entry {x!r} is not an integer")
                row.append(int(f))
            if len(row) != self.h2_rank:
                raise DimMismatch(f"Chern vector of length {len(row)}, h2_rank is {self.h2_rank}")
            chern.append(tuple(row))
        if len(chern) != self.transverse_dim:
            raise DimMismatch(f"{len(chern)} Chern vectors for transverse dim {self.transverse_dim}")
        w = self.omega0 if isinstance(self.omega0, ExactVector) else ExactVector.of(self.omega0)
        if w.dim != self.h2_rank:
            raise DimMismatch(f"base class has dim {w.dim}, h2_rank is {self.h2_rank}")
        object.__setattr__(self, "chern", tuple(chern))
        object.__setattr__(self, "omega0", w)
        object.__setattr__(self, "positive_classes",
                           tuple(tuple(Fraction(x) for x in h) for h in self.positive_classes))

    @classmethod
    def of(cls, chern: Sequence[Sequence[int]], omega0=None, positive_classes=(), basis: PeriodBasis = RATIONAL):
        q = len(chern)
        h = len(chern[0]) if q else 0
        w = ExactVector.zeros(h, basis) if omega0 is None else (
            omega0 if isinstance(omega0, ExactVector) else ExactVector.of(omega0, basis))
        return cls(q, h, tuple(tuple(c) for c in chern), w, tuple(positive_classes))

    @classmethod
    def from_json(cls, data: dict) -> "LeafModel":
        basis = PeriodBasis.from_json(data.get("basis"))
        return cls.of(data["chern"], data.get("omega0"), data.get("positive_classes", ()), basis)

    def to_json(self) -> dict:
        out = {"chern": [list(c) for c in self.chern], "omega0": self.omega0.to_json()}
        if self.positive_classes:
            out["positive_classes"] = [[str(x) for x in h] for h in self.positive_classes]
        if not self.omega0.basis.is_rational:
            out["basis"] = self.omega0.basis.to_json()
        return out


def _dev_vector(dev, basis: PeriodBasis) -> ExactVector:
    return dev if isinstance(dev, ExactVector) else ExactVector.of(dev, basis)


def _chern_combination(leaf: LeafModel, coeffs: ExactVector) -> ExactVector:
    """``Σ coeffs^i c_i`` as an exact vector in ``R^h``."""
    s = coeffs.basis.size
    out = []
    for j in range(leaf.h2_rank):
        out.append(tuple(sum((leaf.chern[i][j] * coeffs.coeffs[i][k] for i in range(leaf.transverse_dim)),
                             Fraction(0)) for k in range(s)))
    return ExactVector(tuple(out), coeffs.basis)


def variation_along(leaf: LeafModel, dev) -> ExactVector:
    """``[ω0] + Σ dev^i c_i``."""
    d = _dev_vector(dev, leaf.omega0.basis)
    if d.dim != leaf.transverse_dim:
        raise DimMismatch(f"dev has dim {d.dim}, leaf has transverse dim {leaf.transverse_dim}")
    w, d = align(leaf.omega0, d)
    return w + _chern_combination(leaf, d)


def variation_along_float(leaf: LeafModel, dev: Sequence[float]) -> np.ndarray:
    d = np.asarray(dev, dtype=float)
    if d.shape != (leaf.transverse_dim,):
        raise DimMismatch(f"dev has shape {d.shape}, leaf has transverse dim {leaf.transverse_dim}")
    return np.array(leaf.omega0.to_float()) + d @ np.array(leaf.chern, dtype=float)


def pi1_action(leaf: LeafModel, g: AffineElement) -> LeafModel:
    """Transport ``(ω0, c)`` along a loop with affine holonomy ``g = (u, A)``.

    ``ω0' = ω0 + Σ_k u^k c_k`` and ``c_i' = Σ_k A[k][i] c_k``, i.e. the linear
    part acts by ``A e_i = Σ_k A[k][i] e_k``. For ``A = [[1,1],[0,1]]`` this
    gives ``c_1' = c_1`` and ``c_2' = c_1 + c_2``.
    """
    if g.dim != leaf.transverse_dim:
        raise DimMismatch(f"element has dim {g.dim}, leaf has transverse dim {leaf.transverse_dim}")
    q, A = leaf.transverse_dim, g.A
    w, u = align(leaf.omega0, g.u)
    w = w + _chern_combination(leaf, u)
    chern = tuple(tuple(sum(A[k][i] * leaf.chern[k][j] for k in range(q)) for j in range(leaf.h2_rank))
                  for i in range(q))
    return LeafModel(q, leaf.h2_rank, chern, w, leaf.positive_classes)


def in_symplectic_cone(leaf: LeafModel, klass: ExactVector) -> bool:
    """Positivity of ``klass`` against every supplied positive homology class."""
    for h in leaf.positive_classes:
        if klass.is_rational:
            val = sum((a * b for a, b in zip(klass.rational_entries(), h)), Fraction(0))
        else:
            val = sum(float(e) * float(b) for e, b in zip(klass.entries, h))
        if not val > 0:
            return False
    return True


@dataclass(frozen=True)
class VariationResult:
    klass: ExactVector
    kernel_basis: tuple[tuple[int, ...], ...]
    full_variation: bool
    zero_variation: bool

    def to_json(self) -> dict:
        return {"class": self.klass.to_json(), "kernel_basis": [list(k) for k in self.kernel_basis],
                "full_variation": self.full_variation, "zero_variation": self.zero_variation}


def variation_decomposition(leaf: LeafModel) -> VariationResult:
    """Kernel of ``v -> Σ v^i c_i`` with the zero/full variation flags."""
    M = [[leaf.chern[i][j] for i in range(leaf.transverse_dim)] for j in range(leaf.h2_rank)]
    ns = intmat.nullspace_q(M, leaf.transverse_dim)
    K = tuple(tuple(intmat.primitive(v)) for v in ns)
    zero = all(not any(c) for c in leaf.chern)
    return VariationResult(leaf.omega0, K, not K, zero)


# ---------------------------------------------------------------------------
# monodromy groups in R^1


@dataclass(frozen=True)
class MonodromyResult:
    N_mon: ClosedSubgroup
    N_hol: ClosedSubgroup
    N_E: ClosedSubgroup | None
    mon_verdict: object
    hol_verdict: object
    index: IndexResult | None
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        def verdict(v):
            if v.discrete:
                return {"discrete": True, "basis": [b.to_json() for b in v.basis]}
            return {"discrete": False, "cospan": [b.to_json() for b in v.cospan]}

        out = {"N_mon": verdict(self.mon_verdict), "N_hol": verdict(self.hol_verdict),
               "notes": list(self.notes)}
        if self.N_E is not None:
            out["N_E"] = verdict(is_discrete(self.N_E))
        if self.index is not None:
            out["index_mon_in_hol"] = self.index.index
            out["index_reason"] = self.index.reason
        return out


def _scalars(values, basis: PeriodBasis) -> list[ExactScalar]:
    out = []
    for v in values:
        out.append(v if isinstance(v, ExactScalar) else ExactScalar.of(v, basis))
    return out


def _subgroup(scalars: Sequence[ExactScalar], basis: PeriodBasis) -> ClosedSubgroup:
    return ClosedSubgroup(1, tuple(ExactVector.of([s], basis) for s in scalars))


def monodromy_product_family(spherical, all_periods, intermediate=None,
                             basis: PeriodBasis = RATIONAL) -> MonodromyResult:
    """``N_mon = <spherical>`` and ``N_hol = <all periods>`` as closed subgroups of R.

    ``intermediate`` (optional) is an ``N_E`` generator list with
    ``spherical ⊆ intermediate ⊆ all``; containment is checked on generators.
    """
    sph = _scalars(spherical, basis)
    alls = _scalars(all_periods, basis)
    if not set(sph) <= set(alls):
        raise SubsetViolation("spherical periods must be among all periods")
    mid = None
    if intermediate is not None:
        mids = _scalars(intermediate, basis)
        if not (set(sph) <= set(mids) <= set(alls)):
            raise SubsetViolation("intermediate periods must sit between spherical and all periods")
        mid = _subgroup(mids, basis)
    mon, hol = _subgroup(sph, basis), _subgroup(alls, basis)
    vm, vh = is_discrete(mon), is_discrete(hol)
    index = None
    if vm.discrete and vh.discrete and mon.is_rational and hol.is_rational:
        index = finite_index(Lattice(1, vm.basis), Lattice(1, vh.basis))
    notes = tuple(sorted(set(vm.notes) | set(vh.notes)))
    return MonodromyResult(mon, hol, mid, vm, vh, index, notes)


def strong_type_test(N_mon: ClosedSubgroup, q: int) -> bool:
    """True iff ``N_mon`` is a lattice of full rank ``q``."""
    if N_mon.dim != q:
        raise DimMismatch(f"subgroup lives in R^{N_mon.dim}, expected R^{q}")
    v = is_discrete(N_mon)
    return bool(v.discrete and v.rank == q)


# ---------------------------------------------------------------------------
# mesh integrals


@dataclass(frozen=True)
class CurvatureSample:
    """Cell-midpoint values of a curvature density on ``[x0,x1) x [y0,y1)``."""

    x_range: tuple[float, float]
    y_range: tuple[float, float]
    values: np.ndarray
    periods: tuple[float, float] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or min(v.shape) < 1:
            raise InconsistentGrid("curvature values must form a non-empty 2-D grid")
        (a, b), (c, d) = self.x_range, self.y_range
        if not (b > a and d > c):
            raise InconsistentGrid("grid ranges must be increasing")
        if self.periods is not None and not np.allclose(self.periods, (b - a, d - c)):
            raise InconsistentGrid("grid does not cover one period in each direction")
        if not np.all(np.isfinite(v)):
            raise InconsistentGrid("curvature values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, f: Callable, x_range, y_range, nx: int, ny: int, periodic: bool = True):
        (a, b), (c, d) = x_range, y_range
        xs = a + (np.arange(nx) + 0.5) * (b - a) / nx
        ys = c + (np.arange(ny) + 0.5) * (d - c) / ny
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        vals = np.broadcast_to(np.asarray(f(X, Y), dtype=float), X.shape)
        return cls((a, b), (c, d), np.array(vals), (b - a, d - c) if periodic else None)

    @property
    def cell_area(self) -> float:
        nx, ny = self.values.shape
        return (self.x_range[1] - self.x_range[0]) * (self.y_range[1] - self.y_range[0]) / (nx * ny)


def curvature_pairing(sample: CurvatureSample, backend: str | None = None) -> float:
    """Midpoint-rule integral of the curvature density over the grid."""
    return kernels.get_backend(backend).grid_sum(sample.values, sample.cell_area)


def coadjoint_su2_area(r: float, mesh_n: int = 256, backend: str | None = None) -> float:
    """Area of the radius-``r`` coadjoint orbit of SU(2) for the KKS form
    ``ω_ξ(ad*_u ξ, ad*_v ξ) = ξ·(u × v)``; analytically ``4πr``."""
    if not r > 0:
        raise ValueError("radius must be positive")
    if mesh_n < 16:
        raise ValueError("mesh_n must be at least 16")
    return kernels.get_backend(backend).kks_area(float(r), int(mesh_n))


REEB_CURVATURE = -1.0


def reeb_example(n: int = 256) -> dict:
    """Constant curvature -1 on θ in [0,2π), z in [0,1): the constant and the raw integral."""
    s = CurvatureSample.from_function(lambda t, z: np.full_like(t, REEB_CURVATURE), (0.0, 2 * math.pi),
                                      (0.0, 1.0), n, n)
    return {"curvature_constant": REEB_CURVATURE, "raw_integral": curvature_pairing(s),
            "coordinate_area": 2 * math.pi}
