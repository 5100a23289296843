"""Integral affine densities, Duistermaat-Heckman histograms, and the Monte
Carlo checks of the Fubini, Weyl and pair-groupoid identities.

All sampling goes through ``rng.map_batches`` so an estimate depends only on
``(seed, samples)``; per-batch partial sums are combined in batch order with a
pairwise tree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from . import intmat, kernels, rng
from .exact import ExactError, ExactVector


class RankDeficient(ExactError):
    pass


# ---------------------------------------------------------------------------
# affine density


def affine_density_exact(basis: Sequence[ExactVector]) -> Fraction:
    """``|det|`` of a rational lattice basis."""
    q = len(basis)
    if q == 0 or any(v.dim != q for v in basis):
        raise RankDeficient(f"need {q} vectors in R^{q}")
    det = intmat.det_int([list(v.rational_entries()) for v in basis])
    if det == 0:
        raise RankDeficient("basis is not full rank")
    return abs(Fraction(det))


def affine_density(basis: Sequence[ExactVector]) -> float:
    """Density ``|λ_1 ∧ ... ∧ λ_q|`` of the integral affine measure."""
    if all(v.is_rational for v in basis):
        return float(affine_density_exact(basis))
    import mpmath
    q = len(basis)
    if any(v.dim != q for v in basis):
        raise RankDeficient(f"need {q} vectors in R^{q}")
    prec = max(v.basis.precision() for v in basis)
    with mpmath.workdps(prec):
        d = mpmath.det(mpmath.matrix([v.approx() for v in basis]))
        if abs(d) < mpmath.mpf(10) ** (-(prec // 2)):
            raise RankDeficient("basis is not full rank")
        return float(abs(d))


# ---------------------------------------------------------------------------
# samplers and histograms


@dataclass(frozen=True)
class LiouvilleSampler:
    """Uniform samples in a phase-space box; each sample carries mass
    ``box volume / samples`` of the Darboux Liouville measure
    ``ω^n/n! = dx_1 ... dp_n`` (times the indicator of ``keep``, if given)."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    keep: Callable[[np.ndarray], np.ndarray] | None = None

    @classmethod
    def cube(cls, dim: int, half_width: float, keep=None) -> "LiouvilleSampler":
        return cls((-half_width,) * dim, (half_width,) * dim, keep)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.hi, self.lo)))

    def draw(self, g: np.random.Generator, size: int) -> np.ndarray:
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return lo + (hi - lo) * g.random((size, self.dim))


@dataclass(frozen=True)
class MeasureHistogram:
    edges: tuple[np.ndarray, ...]
    masses: np.ndarray
    stderr: np.ndarray
    samples: int
    sampled_volume: float

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(e) - 1 for e in self.edges)

    @property
    def bin_volumes(self) -> np.ndarray:
        w = [np.diff(e) for e in self.edges]
        out = w[0]
        for x in w[1:]:
            out = np.multiply.outer(out, x)
        return out

    @property
    def densities(self) -> np.ndarray:
        return self.masses / self.bin_volumes

    @property
    def density_stderr(self) -> np.ndarray:
        return self.stderr / self.bin_volumes

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def total_stderr(self) -> float:
        p = self.total_mass / self.sampled_volume
        return self.sampled_volume * math.sqrt(max(p * (1 - p), 0.0) / self.samples)

    def centers(self, axis: int = 0) -> np.ndarray:
        e = self.edges[axis]
        return 0.5 * (e[:-1] + e[1:])

    def rows(self) -> list[tuple[float, float, float, float]]:
        """``(bin_lo, bin_hi, mass, stderr)`` rows for a one-dimensional histogram."""
        if len(self.edges) != 1:
            raise ValueError("CSV rows are defined for one-dimensional histograms")
        e = self.edges[0]
        return [(float(e[i]), float(e[i + 1]), float(self.masses[i]), float(self.stderr[i]))
                for i in range(len(e) - 1)]

    def to_json(self) -> dict:
        return {"edges": [e.tolist() for e in self.edges], "masses": self.masses.tolist(),
                "stderr": self.stderr.tolist(), "samples": self.samples,
                "sampled_volume": self.sampled_volume, "total_mass": self.total_mass,
                "total_stderr": self.total_stderr}


def dh_pushforward(sampler: LiouvilleSampler, mu: Callable[[np.ndarray], np.ndarray], bins, samples: int,
                   seed: int, backend: str | None = None) -> MeasureHistogram:
    """Histogram of ``μ_*(Liouville)``.

    ``mu`` maps an ``(N, 2n)`` array to ``(N,)`` or ``(N, k)``; ``bins`` is one
    ``(lo, hi, nbins)`` triple per component.
    """
    bins = [tuple(b) for b in bins]
    lo = np.array([b[0] for b in bins], dtype=float)
    hi = np.array([b[1] for b in bins], dtype=float)
    nb = np.array([int(b[2]) for b in bins], dtype=np.int64)
    K = kernels.get_backend(backend)

    def batch(g, size):
        x = sampler.draw(g, size)
        vals = np.asarray(mu(x), dtype=float).reshape(size, -1)
        if vals.shape[1] != len(bins):
            raise ValueError(f"moment map has {vals.shape[1]} components, {len(bins)} bin specs given")
        if sampler.keep is not None:
            vals = vals[np.asarray(sampler.keep(x), dtype=bool)]
        return K.binned_counts(vals, lo, hi, nb)

    counts = np.sum(rng.map_batches(batch, seed, samples), axis=0).reshape(tuple(nb))
    V = sampler.volume
    p = counts / samples
    masses = V * p
    stderr = V * np.sqrt(p * (1 - p) / samples)
    edges = tuple(np.linspace(a, b, int(n) + 1) for a, b, n in bins)
    return MeasureHistogram(edges, masses, stderr, int(samples), V)


@dataclass(frozen=True)
class FitResult:
    coefficients: tuple[float, ...]
    max_relative_residual: float
    bins_used: tuple[int, ...]

    def to_json(self) -> dict:
        return {"coefficients": list(self.coefficients), "max_relative_residual": self.max_relative_residual,
                "bins_used": list(self.bins_used)}


def polynomial_fit(hist: MeasureHistogram, degree: int) -> FitResult:
    """Least-squares polynomial in the bin center fitted to the density on the
    interior bins (first and last bins dropped). Coefficients lowest degree first."""
    if len(hist.edges) != 1:
        raise ValueError("polynomial_fit expects a one-dimensional histogram")
    nbins = hist.shape[0]
    if degree < 0 or degree > nbins - 2:
        raise ValueError(f"degree must be in [0, {nbins - 2}]")
    idx = np.arange(1, nbins - 1)
    x, y = hist.centers()[idx], hist.densities[idx]
    coef = np.polynomial.polynomial.polyfit(x, y, degree)
    fit = np.polynomial.polynomial.polyval(x, coef)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(fit - y) / np.abs(y)
    rel = np.where(np.isfinite(rel), rel, np.inf)
    return FitResult(tuple(float(c) for c in coef), float(rel.max()), tuple(int(i) for i in idx))


def s1_on_c2(samples: int, seed: int, nbins: int = 10, backend: str | None = None) -> MeasureHistogram:
    """Circle action on ``C^2`` with ``μ = |z|^2/2``, bins on ``(0, 2)``."""
    sampler = LiouvilleSampler.cube(4, 2.0)
    return dh_pushforward(sampler, lambda x: 0.5 * np.sum(x * x, axis=1), [(0.0, 2.0, nbins)], samples, seed,
                          backend)


def t2_on_c2(samples: int, seed: int, nbins: int = 5, backend: str | None = None) -> MeasureHistogram:
    """Torus action on ``C^2`` with ``μ = (|z_1|^2/2, |z_2|^2/2)``; coordinates ``(x1, x2, p1, p2)``."""
    sampler = LiouvilleSampler.cube(4, 2.0)

    def mu(x):
        return 0.5 * np.stack([x[:, 0] ** 2 + x[:, 2] ** 2, x[:, 1] ** 2 + x[:, 3] ** 2], axis=1)
    return dh_pushforward(sampler, mu, [(0.0, 2.0, nbins)] * 2, samples, seed, backend)


# ---------------------------------------------------------------------------
# Monte Carlo helpers


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    samples: int

    def to_json(self) -> dict:
        return {"value": self.value, "stderr": self.stderr, "samples": self.samples}


def _mean_and_stderr(fn: Callable[[np.random.Generator, int], np.ndarray], samples: int, seed: int,
                     backend: str | None = None) -> tuple[float, float]:
    """Mean and standard error of per-sample values produced batch by batch."""
    if samples < 2:
        raise ValueError("need at least two samples")
    K = kernels.get_backend(backend)

    def batch(g, size):
        v = np.asarray(fn(g, size), dtype=float)
        return K.pairwise_sum(v), K.pairwise_sum(v * v)

    parts = rng.map_batches(batch, seed, samples)
    s1 = K.pairwise_sum(np.array([p[0] for p in parts]))
    s2 = K.pairwise_sum(np.array([p[1] for p in parts]))
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) * samples / (samples - 1)
    return mean, math.sqrt(var / samples)


# ---------------------------------------------------------------------------
# Fubini on S^2 x [a, b]


@dataclass(frozen=True)
class FubiniResult:
    lhs: float
    lhs_stderr: float
    rhs: float
    discrepancy: float

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "lhs_stderr": self.lhs_stderr, "rhs": self.rhs, "discrepancy": self.discrepancy}


def leaf_integral(f: Callable, b: float, n_theta: int = 200) -> float:
    """Midpoint rule for ``∫_{S^2} f(x, y, z, b) dA`` on the unit sphere."""
    th = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    ph = (np.arange(2 * n_theta) + 0.5) * math.pi / n_theta
    T, P = np.meshgrid(th, ph, indexing="ij")
    st = np.sin(T)
    vals = np.asarray(f(st * np.cos(P), st * np.sin(P), np.cos(T), np.full_like(T, b)), dtype=float)
    vals = np.broadcast_to(vals, T.shape) * st
    return kernels.pairwise_sum(vals) * (math.pi / n_theta) ** 2


def fubini_check(f: Callable, iota: Callable[[float], int] = lambda b: 1, base=(0.0, 1.0),
                 base_density: float = 1.0, mu_scale: float = 1.0, samples: int = 100_000, seed: int = 0,
                 n_base: int = 64, n_theta: int = 200, backend: str | None = None) -> FubiniResult:
    """Compare ``∫_M f dμ_M`` (Monte Carlo) on ``M = S^2 x [a, b]`` with
    ``∫_B ι(b) (∫_{S_b} f) dμ_Aff`` (quadrature).

    ``μ_M`` is ``mu_scale`` times area times ``base_density·db``; ``f`` takes
    ``(x, y, z, b)`` arrays.
    """
    a, bb = base

    def values(g, size):
        v = g.standard_normal((size, 3))
        v /= np.linalg.norm(v, axis=1)[:, None]
        s = a + (bb - a) * g.random(size)
        return np.broadcast_to(np.asarray(f(v[:, 0], v[:, 1], v[:, 2], s), dtype=float), (size,))

    mean, se = _mean_and_stderr(values, samples, seed, backend)
    vol = mu_scale * 4 * math.pi * (bb - a) * base_density
    lhs, lhs_se = vol * mean, vol * se
    h = (bb - a) / n_base
    mids = a + (np.arange(n_base) + 0.5) * h
    leaf = np.array([iota(m) * leaf_integral(f, m, n_theta) for m in mids])
    rhs = kernels.pairwise_sum(leaf) * h * base_density
    disc = abs(lhs - rhs) / abs(lhs) if lhs else abs(rhs)
    return FubiniResult(lhs, lhs_se, rhs, disc)


# ---------------------------------------------------------------------------
# Weyl integration on su(2) = R^3


RADIAL = {
    "gaussian": (lambda r: np.exp(-r * r), (), math.pi ** 1.5),
    "ball": (lambda r: (np.abs(r) <= 1.0).astype(float), (-1.0, 1.0), 4 * math.pi / 3),
    "zero": (lambda r: np.zeros_like(r), (), 0.0),
}


@dataclass(frozen=True)
class WeylResult:
    lhs: float
    lhs_stderr: float
    rhs: float
    reference: float | None
    lhs_error: float | None
    rhs_error: float | None

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "lhs_stderr": self.lhs_stderr, "rhs": self.rhs, "reference": self.reference,
                "lhs_relative_error": self.lhs_error, "rhs_relative_error": self.rhs_error}


WEYL_GROUP_ORDER = 2


def weyl_su2_check(f, samples: int = 1_000_000, seed: int = 0, proposal_scale: float = 1.0,
                   breakpoints: Sequence[float] = (), reference: float | None = None,
                   backend: str | None = None) -> WeylResult:
    """``∫_{R^3} f(|x|) dx`` by importance sampling against
    ``(1/|W|) ∫_R 4π r^2 f(|r|) dr`` by adaptive quadrature, ``|W| = 2``.

    ``f`` is a name from ``RADIAL`` or a vectorized radial function.
    """
    if isinstance(f, str):
        f, breakpoints, reference = RADIAL[f]
    s = float(proposal_scale)
    norm = (2 * math.pi * s * s) ** 1.5

    def values(g, size):
        x = s * g.standard_normal((size, 3))
        r2 = np.sum(x * x, axis=1)
        return f(np.sqrt(r2)) * norm * np.exp(r2 / (2 * s * s))

    lhs, se = _mean_and_stderr(values, samples, seed, backend)

    def radial(r):
        return 4 * math.pi * r * r * float(f(np.array(abs(r))))

    pts = sorted(set(float(p) for p in breakpoints))
    edges = [-math.inf, *pts, math.inf]
    rhs = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        rhs += integrate.quad(radial, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    rhs /= WEYL_GROUP_ORDER
    if reference is None:
        return WeylResult(lhs, se, rhs, None, None, None)
    if reference == 0:
        return WeylResult(lhs, se, rhs, 0.0, abs(lhs), abs(rhs))
    return WeylResult(lhs, se, rhs, reference, abs(lhs - reference) / abs(reference),
                      abs(rhs - reference) / abs(reference))


# ---------------------------------------------------------------------------
# pair groupoid S^2 x S^2


def pair_groupoid_mass(area: float, samples: int = 100_000, seed: int = 0,
                       backend: str | None = None) -> Estimate:
    """Liouville mass of ``(S^2 x S^2, pr_1*ω - pr_2*ω)`` with ``∫ω = area``,
    sampled uniformly in ``(θ1, φ1, θ2, φ2)``; analytically ``area^2``."""
    if not area > 0:
        raise ValueError("area must be positive")
    K = kernels.get_backend(backend)
    box = (math.pi * 2 * math.pi) ** 2

    def values(g, size):
        u = g.random((size, 4))
        return K.pair_liouville_density(area, math.pi * u[:, 0], 2 * math.pi * u[:, 1],
                                        math.pi * u[:, 2], 2 * math.pi * u[:, 3])

    mean, se = _mean_and_stderr(values, samples, seed, backend)
    return Estimate(box * mean, box * se, int(samples))
