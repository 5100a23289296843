"""Pure-numpy reference implementations of the hot kernels."""
import numpy as np

LEAF = 128


def pairwise_sum(x):
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    n = x.size
    if n == 0:
        return 0.0
    nb = -(-n // LEAF)
    pad = np.zeros(nb * LEAF)
    pad[:n] = x
    s = pad.reshape(nb, LEAF).sum(axis=1)
    while s.size > 1:
        if s.size % 2:
            s = np.append(s, 0.0)
        s = s[0::2] + s[1::2]
    return float(s[0])


def transported_trapezoid(t, mats, vel):
    """Trapezoid rule for ``∫ mats(t) @ vel(t) dt`` on a sampled grid."""
    t = np.asarray(t, dtype=np.float64)
    f = np.einsum("nij,nj->ni", np.asarray(mats, dtype=np.float64), np.asarray(vel, dtype=np.float64))
    dt = np.diff(t)
    inc = 0.5 * dt[:, None] * (f[:-1] + f[1:])
    return np.array([pairwise_sum(inc[:, k]) for k in range(f.shape[1])])


def grid_sum(values, cell_area):
    return pairwise_sum(values) * cell_area


def _kks_density(r, theta, phi):
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    xi = r * np.stack([st * cp, st * sp, ct], axis=-1)
    X = r * np.stack([ct * cp, ct * sp, -st], axis=-1)
    Y = r * np.stack([-st * sp, st * cp, np.zeros_like(st)], axis=-1)
    r2 = np.sum(xi * xi, axis=-1)[..., None]
    u = np.cross(xi, X) / r2
    v = np.cross(xi, Y) / r2
    return np.abs(np.sum(xi * np.cross(u, v), axis=-1))


def kks_area(r, n):
    """Midpoint-rule area of the radius-r coadjoint sphere for the KKS form
    ``ω_ξ(ad*_u ξ, ad*_v ξ) = ξ·(u × v)``; n polar by 2n azimuthal cells."""
    dth, dph = np.pi / n, 2 * np.pi / (2 * n)
    th = (np.arange(n) + 0.5) * dth
    ph = (np.arange(2 * n) + 0.5) * dph
    T, P = np.meshgrid(th, ph, indexing="ij")
    return pairwise_sum(_kks_density(r, T, P)) * dth * dph


def _sphere_partials(th, ph):
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    n = np.stack([st * cp, st * sp, ct], axis=-1)
    dth = np.stack([ct * cp, ct * sp, -st], axis=-1)
    dph = np.stack([-st * sp, st * cp, np.zeros_like(st)], axis=-1)
    return n, dth, dph


def pair_liouville_density(area, th1, ph1, th2, ph2):
    """|Pf Ω| for Ω = pr1*ω - pr2*ω in coordinates (θ1, φ1, θ2, φ2), where ω
    is the round area form scaled to total area ``area``."""
    c = area / (4 * np.pi)
    n1, a1, b1 = _sphere_partials(th1, ph1)
    n2, a2, b2 = _sphere_partials(th2, ph2)
    w1 = c * np.sum(n1 * np.cross(a1, b1), axis=-1)
    w2 = c * np.sum(n2 * np.cross(a2, b2), axis=-1)
    z = np.zeros_like(w1)
    O01, O23 = w1, -w2
    O02 = O03 = O12 = O13 = z
    return np.abs(O01 * O23 - O02 * O13 + O03 * O12)


def binned_counts(values, lo, hi, nbins):
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    nbins = np.asarray(nbins, dtype=np.int64)
    idx = np.floor((values - lo) / (hi - lo) * nbins).astype(np.int64)
    ok = np.all((idx >= 0) & (idx < nbins) & (values < hi), axis=1)
    flat = np.zeros(values.shape[0], dtype=np.int64)
    for d in range(values.shape[1]):
        flat = flat * nbins[d] + idx[:, d]
    return np.bincount(flat[ok], minlength=int(np.prod(nbins))).astype(np.int64)
