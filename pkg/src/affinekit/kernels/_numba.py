"""numba versions of the kernels in ``_numpy``; same signatures and results up
to floating-point summation order inside leaves."""
import math

import numpy as np
from numba import njit

LEAF = 128


@njit(cache=True)
def _pairwise(x):
    n = x.size
    if n == 0:
        return 0.0
    nb = (n + LEAF - 1) // LEAF
    s = np.zeros(nb)
    for b in range(nb):
        acc = 0.0
        for i in range(b * LEAF, min(n, (b + 1) * LEAF)):
            acc += x[i]
        s[b] = acc
    m = nb
    while m > 1:
        half = (m + 1) // 2
        for i in range(half):
            j = 2 * i + 1
            s[i] = s[2 * i] + (s[j] if j < m else 0.0)
        m = half
    return s[0]


def pairwise_sum(x):
    return float(_pairwise(np.ascontiguousarray(x, dtype=np.float64).ravel()))


@njit(cache=True)
def _trap(t, mats, vel):
    n, q = vel.shape
    inc = np.zeros((q, max(n - 1, 0)))
    prev = np.zeros(q)
    for k in range(q):
        acc = 0.0
        for j in range(q):
            acc += mats[0, k, j] * vel[0, j]
        prev[k] = acc
    cur = np.zeros(q)
    for i in range(1, n):
        for k in range(q):
            acc = 0.0
            for j in range(q):
                acc += mats[i, k, j] * vel[i, j]
            cur[k] = acc
        dt = t[i] - t[i - 1]
        for k in range(q):
            inc[k, i - 1] = 0.5 * dt * (prev[k] + cur[k])
            prev[k] = cur[k]
    out = np.zeros(q)
    for k in range(q):
        out[k] = _pairwise(inc[k])
    return out


def transported_trapezoid(t, mats, vel):
    return _trap(np.asarray(t, dtype=np.float64), np.ascontiguousarray(mats, dtype=np.float64),
                 np.ascontiguousarray(vel, dtype=np.float64))


def grid_sum(values, cell_area):
    return pairwise_sum(values) * cell_area


@njit(cache=True)
def _cross(a0, a1, a2, b0, b1, b2):
    return a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0


@njit(cache=True)
def _kks(r, n):
    dth = math.pi / n
    dph = 2 * math.pi / (2 * n)
    vals = np.empty(n * 2 * n)
    k = 0
    for i in range(n):
        th = (i + 0.5) * dth
        st, ct = math.sin(th), math.cos(th)
        for j in range(2 * n):
            ph = (j + 0.5) * dph
            sp, cp = math.sin(ph), math.cos(ph)
            x0, x1, x2 = r * st * cp, r * st * sp, r * ct
            X0, X1, X2 = r * ct * cp, r * ct * sp, -r * st
            Y0, Y1, Y2 = -r * st * sp, r * st * cp, 0.0
            r2 = x0 * x0 + x1 * x1 + x2 * x2
            u0, u1, u2 = _cross(x0, x1, x2, X0, X1, X2)
            v0, v1, v2 = _cross(x0, x1, x2, Y0, Y1, Y2)
            u0, u1, u2 = u0 / r2, u1 / r2, u2 / r2
            v0, v1, v2 = v0 / r2, v1 / r2, v2 / r2
            w0, w1, w2 = _cross(u0, u1, u2, v0, v1, v2)
            vals[k] = abs(x0 * w0 + x1 * w1 + x2 * w2)
            k += 1
    return _pairwise(vals) * dth * dph


def kks_area(r, n):
    return float(_kks(float(r), int(n)))


@njit(cache=True)
def _pair_density(area, th1, ph1, th2, ph2):
    c = area / (4 * math.pi)
    out = np.empty(th1.size)
    for i in range(th1.size):
        ws = np.empty(2)
        for s in range(2):
            th = th1[i] if s == 0 else th2[i]
            ph = ph1[i] if s == 0 else ph2[i]
            st, ct, sp, cp = math.sin(th), math.cos(th), math.sin(ph), math.cos(ph)
            c0, c1, c2 = _cross(ct * cp, ct * sp, -st, -st * sp, st * cp, 0.0)
            ws[s] = c * (st * cp * c0 + st * sp * c1 + ct * c2)
        O01, O23 = ws[0], -ws[1]
        out[i] = abs(O01 * O23 - 0.0 * 0.0 + 0.0 * 0.0)
    return out


def pair_liouville_density(area, th1, ph1, th2, ph2):
    f = lambda a: np.ascontiguousarray(a, dtype=np.float64).ravel()
    return _pair_density(float(area), f(th1), f(ph1), f(th2), f(ph2))


@njit(cache=True)
def _binned(values, lo, hi, nbins):
    total = 1
    for d in range(nbins.size):
        total *= nbins[d]
    counts = np.zeros(total, dtype=np.int64)
    n, k = values.shape
    for i in range(n):
        flat = 0
        ok = True
        for d in range(k):
            v = values[i, d]
            idx = int(math.floor((v - lo[d]) / (hi[d] - lo[d]) * nbins[d]))
            if idx < 0 or idx >= nbins[d] or not v < hi[d]:
                ok = False
                break
            flat = flat * nbins[d] + idx
        if ok:
            counts[flat] += 1
    return counts


def binned_counts(values, lo, hi, nbins):
    values = np.ascontiguousarray(np.atleast_2d(np.asarray(values, dtype=np.float64)))
    return _binned(values, np.atleast_1d(np.asarray(lo, dtype=np.float64)),
                   np.atleast_1d(np.asarray(hi, dtype=np.float64)),
                   np.atleast_1d(np.asarray(nbins, dtype=np.int64)))
