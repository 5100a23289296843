"""Period lattices of Lagrangian fibrations given by explicit moment maps.

Phase space is ``R^{2n}`` with coordinates ``(x_1..x_n, p_1..p_n)`` and
``ω = Σ dx_i ∧ dp_i``. For a covector ``α`` the field ``σ(α)`` is the
Hamiltonian vector field of ``α·μ``: ``dx/dt = ∂H/∂p``, ``dp/dt = -∂H/∂x``.
``α`` is a period at ``b`` when the time-1 flow of ``σ(α)`` fixes the fiber
``μ^{-1}(b)``; the first return time ``τ`` along a ray gives ``τ·α``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import intmat


class RealizationError(RuntimeError):
    pass


class DomainViolation(RealizationError):
    pass


class NonCommuting(RealizationError):
    pass


class NonCompactFiber(RealizationError):
    pass


class NoReturnFound(RealizationError):
    pass


RTOL = ATOL = 1e-10


@dataclass
class MomentSystem:
    n: int
    k: int
    mu: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray]
    box: tuple[np.ndarray, np.ndarray]
    name: str = "custom"
    check_seed: int = 0
    spec: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.k <= self.n:
            raise DomainViolation(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        lo, hi = (np.asarray(b, dtype=float) for b in self.box)
        if lo.shape != (2 * self.n,) or hi.shape != lo.shape or np.any(hi <= lo):
            raise DomainViolation("domain box must give 2n increasing intervals")
        self.box = (lo, hi)
        res = bracket_residual(self, 100, self.check_seed)
        if res >= 1e-6:
            raise NonCommuting(f"moment components do not Poisson-commute (residual {res:.3g})")

    def field(self, alpha: np.ndarray, z: np.ndarray) -> np.ndarray:
        """``σ(α)`` at ``z`` from the exact gradient of ``α·μ``."""
        g = np.asarray(alpha, dtype=float) @ self.jac(z)
        return np.concatenate([g[self.n:], -g[:self.n]])

    def scaled(self, c: float) -> "MomentSystem":
        c = float(c)
        spec = dict(self.spec, scale=c * self.spec.get("scale", 1.0))
        return MomentSystem(self.n, self.k, lambda z: c * self.mu(z), lambda z: c * self.jac(z), self.box,
                            f"{c:g}*{self.name}", self.check_seed, spec)


def bracket_residual(sys: MomentSystem, samples: int, seed: int, h: float = 1e-5) -> float:
    """Max ``|{μ_a, μ_b}|`` from central finite differences at random box points."""
    if sys.k == 1:
        return 0.0
    rng = np.random.default_rng(seed)
    lo, hi = sys.box
    worst = 0.0
    for _ in range(samples):
        z = lo + (hi - lo) * rng.random(2 * sys.n)
        J = _fd_jac(sys.mu, z, h)
        Jx, Jp = J[:, :sys.n], J[:, sys.n:]
        B = Jx @ Jp.T - Jp @ Jx.T
        worst = max(worst, float(np.max(np.abs(B))))
    return worst


def _fd_jac(f, z, h):
    cols = []
    for i in range(z.size):
        e = np.zeros_like(z)
        e[i] = h
        cols.append((np.asarray(f(z + e)) - np.asarray(f(z - e))) / (2 * h))
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# system constructors


def _osc_mu(z):
    n = z.size // 2
    return 0.5 * (z[:n] ** 2 + z[n:] ** 2)


def _osc_jac(z):
    n = z.size // 2
    J = np.zeros((n, 2 * n))
    J[np.arange(n), np.arange(n)] = z[:n]
    J[np.arange(n), n + np.arange(n)] = z[n:]
    return J


def builtin(name: str, scale: float = 1.0, box: float = 4.0) -> MomentSystem:
    """Named systems: ``oscillator``, ``oscillator2``, ``free_particle``."""
    if name in ("oscillator", "oscillator2"):
        n = 1 if name == "oscillator" else 2
        sys = MomentSystem(n, n, _osc_mu, _osc_jac, (np.full(2 * n, -box), np.full(2 * n, box)), name,
                           spec={"builtin": name})
    elif name == "free_particle":
        sys = MomentSystem(1, 1, lambda z: np.array([z[1]]), lambda z: np.array([[0.0, 1.0]]),
                           (np.full(2, -box), np.full(2, box)), name, spec={"builtin": name})
    else:
        raise DomainViolation(f"unknown built-in system {name!r}")
    return sys if scale == 1.0 else sys.scaled(scale)


def from_expressions(n: int, moment: Sequence[str], box, name: str = "polynomial") -> MomentSystem:
    """System from expressions in ``x1..xn, p1..pn`` (parsed by sympy)."""
    import sympy as sp

    xs = sp.symbols(f"x1:{n + 1}")
    ps = sp.symbols(f"p1:{n + 1}")
    syms = list(xs) + list(ps)
    local = {str(s): s for s in syms}
    try:
        exprs = [sp.sympify(m, locals=local) for m in moment]
    except (sp.SympifyError, TypeError) as exc:
        raise DomainViolation(f"cannot parse moment map: {exc}") from None
    extra = set().union(*(e.free_symbols for e in exprs)) - set(syms)
    if extra:
        raise DomainViolation(f"unknown variables in moment map: {sorted(map(str, extra))}")
    f = sp.lambdify([syms], exprs, "numpy")
    jf = sp.lambdify([syms], [[sp.diff(e, s) for s in syms] for e in exprs], "numpy")
    lo, hi = box
    return MomentSystem(n, len(exprs), lambda z: np.array(f(list(z)), dtype=float),
                        lambda z: np.array(jf(list(z)), dtype=float),
                        (np.asarray(lo, float), np.asarray(hi, float)), name,
                        spec={"n": n, "moment": list(moment), "box": [list(map(float, lo)), list(map(float, hi))]})


def from_json(data: dict) -> MomentSystem:
    if "builtin" in data:
        return builtin(data["builtin"], float(data.get("scale", 1.0)), float(data.get("box", 4.0)))
    box = data["box"]
    sys = from_expressions(int(data["n"]), data["moment"], (box[0], box[1]), data.get("name", "polynomial"))
    return sys if float(data.get("scale", 1.0)) == 1.0 else sys.scaled(float(data["scale"]))


# ---------------------------------------------------------------------------
# moment condition


def moment_condition_check(sys: MomentSystem, samples: int = 100, seed: int = 0, h: float = 1e-6) -> float:
    """Max difference between ``σ(α)`` and a finite-difference Hamiltonian
    vector field of ``α∘μ`` over random ``α`` and box points."""
    if samples < 1:
        raise DomainViolation("samples must be positive")
    rng = np.random.default_rng(seed)
    lo, hi = sys.box
    worst = 0.0
    for _ in range(samples):
        z = lo + (hi - lo) * rng.random(2 * sys.n)
        alpha = rng.standard_normal(sys.k)
        H = lambda w: np.atleast_1d(float(alpha @ np.asarray(sys.mu(w))))
        g = _fd_jac(H, z, h)[0]
        if not np.all(np.isfinite(g)):
            raise DomainViolation(f"moment map is not finite near {z}")
        fd = np.concatenate([g[sys.n:], -g[:sys.n]])
        worst = max(worst, float(np.max(np.abs(fd - sys.field(alpha, z)))))
    return worst


# ---------------------------------------------------------------------------
# period lattice


@dataclass(frozen=True)
class PeriodLatticeEstimate:
    base: tuple[float, ...]
    start: tuple[float, ...]
    generators: tuple[tuple[float, ...], ...]
    residuals: tuple[float, ...]
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"base": list(self.base), "start_point": list(self.start),
                "generators": [list(g) for g in self.generators], "residuals": list(self.residuals),
                "notes": list(self.notes)}


def find_fiber_point(sys: MomentSystem, b, seed: int = 0, attempts: int = 20) -> np.ndarray:
    """A point of ``μ^{-1}(b)`` inside the box, by Gauss-Newton from seeded starts."""
    b = np.asarray(b, dtype=float)
    if b.shape != (sys.k,):
        raise DomainViolation(f"base point must have {sys.k} components")
    rng = np.random.default_rng(seed)
    lo, hi = sys.box
    for _ in range(attempts):
        z = lo + (hi - lo) * (0.25 + 0.5 * rng.random(2 * sys.n))
        for _ in range(100):
            r = np.asarray(sys.mu(z), dtype=float) - b
            if np.max(np.abs(r)) < 1e-14 * max(1.0, np.max(np.abs(b))):
                break
            J = sys.jac(z)
            z = z - np.linalg.lstsq(J, r, rcond=None)[0]
        r = np.asarray(sys.mu(z), dtype=float) - b
        if np.all(np.isfinite(z)) and np.max(np.abs(r)) < 1e-12 and np.all((z > lo) & (z < hi)):
            if np.linalg.matrix_rank(sys.jac(z), tol=1e-8) == sys.k:
                return z
    raise DomainViolation(f"no regular point with moment value {b.tolist()} found in the box")


def _flow(sys, alpha, z0, t_end, events=(), dense=False):
    lo, hi = sys.box

    def leave(t, z):
        return float(np.min(np.minimum(z - lo, hi - z)))
    leave.terminal = True
    leave.direction = -1
    sol = solve_ivp(lambda t, z: sys.field(alpha, z), (0.0, t_end), z0, method="RK45", rtol=RTOL,
                    atol=ATOL, events=[leave, *events], dense_output=dense)
    if sol.t_events[0].size:
        raise NonCompactFiber(f"flow of alpha={np.round(alpha, 6).tolist()} leaves the domain box "
                              f"at t={sol.t_events[0][0]:.6g}")
    return sol


def first_return(sys: MomentSystem, alpha, z0, t_max: float = 100.0, near: float = 1e-6,
                 chunk: float = 10.0) -> float:
    """Smallest ``τ > 0`` with ``φ^τ_{σ(α)}(z0) = z0`` (distance below ``near``)."""
    alpha = np.asarray(alpha, dtype=float)
    z0 = np.asarray(z0, dtype=float)
    scale = max(1.0, float(np.linalg.norm(z0)))

    def closest(t, z):  # (1/2) d/dt |z - z0|^2; rising zero = local minimum of distance
        return float((z - z0) @ sys.field(alpha, z))
    closest.direction = 1

    warm = 1e-3
    sol = _flow(sys, alpha, z0, warm)
    t0, z = warm, sol.y[:, -1]
    while t0 < t_max:
        span = min(chunk, t_max - t0)
        sol = _flow(sys, alpha, z, span, events=[closest])
        for te, ze in zip(sol.t_events[1], sol.y_events[1]):
            if np.linalg.norm(ze - z0) < near * scale:
                return t0 + float(te)
        t0, z = t0 + span, sol.y[:, -1]
    raise NoReturnFound(f"no return within t <= {t_max} for alpha={np.round(alpha, 6).tolist()}")


def time_one_residual(sys: MomentSystem, alpha, z0) -> float:
    sol = _flow(sys, np.asarray(alpha, dtype=float), np.asarray(z0, dtype=float), 1.0)
    return float(np.linalg.norm(sol.y[:, -1] - z0))


def _directions(k: int) -> list[np.ndarray]:
    out = [np.eye(k)[i] for i in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            for s in (1.0, -1.0):
                d = np.eye(k)[i] + s * np.eye(k)[j]
                out.append(d / np.linalg.norm(d))
    return out


def _lattice_basis(vectors: list[np.ndarray], k: int, max_den: int = 12) -> list[np.ndarray]:
    """Basis of the lattice generated by ``vectors`` (numerically integral
    relations with denominators up to ``max_den``)."""
    vectors = sorted(vectors, key=lambda v: float(np.linalg.norm(v)))
    base = []
    for v in vectors:
        if np.linalg.matrix_rank(np.array(base + [v]), tol=1e-6 * np.linalg.norm(v)) > len(base):
            base.append(v)
        if len(base) == k:
            break
    if len(base) < k:
        return base
    B = np.array(base).T
    rows = []
    for v in vectors:
        c = np.linalg.solve(B, v)
        fr = [Fraction(float(x)).limit_denominator(max_den) for x in c]
        if max(abs(float(f) - x) for f, x in zip(fr, c)) > 1e-6:
            continue
        rows.append(fr)
    d = intmat.denominator_lcm(x for r in rows for x in r)
    H = intmat.hermite_normal_form([[int(x * d) for x in r] for r in rows])
    return [B @ (np.array(h, dtype=float) / d) for h in H]


def period_lattice(sys: MomentSystem, b, tol: float = 1e-6, seed: int = 0, t_max: float = 100.0,
                   z0=None) -> PeriodLatticeEstimate:
    """Generators of ``Λ_X`` at ``b`` from first returns along search rays."""
    z0 = find_fiber_point(sys, b, seed) if z0 is None else np.asarray(z0, dtype=float)
    found, notes = [], []
    for d in _directions(sys.k):
        try:
            tau = first_return(sys, d, z0, t_max)
        except NoReturnFound:
            continue
        found.append(tau * d)
    gens = _lattice_basis(found, sys.k)
    if len(gens) < sys.k:
        raise NoReturnFound(f"only {len(gens)} independent periods found for k={sys.k}")
    gens = sorted(gens, key=lambda g: tuple(-abs(x) for x in g))
    residuals = [time_one_residual(sys, g, z0) for g in gens]
    bad = [r for r in residuals if r > tol]
    if bad:
        raise NoReturnFound(f"time-1 residual {max(bad):.3g} exceeds tolerance {tol}")
    if sys.k < sys.n:
        notes.append("isotropic k < n: experimental, not checked against an oracle")
    return PeriodLatticeEstimate(tuple(map(float, np.atleast_1d(b))), tuple(map(float, z0)),
                                 tuple(tuple(float(x) for x in g) for g in gens),
                                 tuple(residuals), tuple(notes))
