"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The first numba call is timed separately (JIT compile); the table reports the
best of ``--repeat`` warm runs and checks that both backends agree.
"""
import argparse
import time

import numpy as np

from affinekit.kernels import get_backend


def cases(rng):
    n = 1_000_000
    vals = rng.uniform(0.0, 5.0, n)
    th = np.arccos(rng.uniform(-1, 1, (4, n // 4)))
    ph = rng.uniform(0, 2 * np.pi, (4, n // 4))
    m = 100_000
    t = np.linspace(0.0, 1.0, m + 1)
    mats = np.tile(np.eye(2), (m + 1, 1, 1))
    mats[:, 0, 1] = t
    vel = np.stack([np.cos(t), np.sin(t)], axis=1)
    return {
        "mc: binned_counts (1e6)": lambda k: k.binned_counts(vals[:, None], [0.0], [5.0], [50]),
        "mc: pairwise_sum (1e6)": lambda k: k.pairwise_sum(vals),
        "mc: pair_liouville_density (2.5e5)": lambda k: k.pair_liouville_density(1.0, th[0], ph[0], th[1], ph[1]),
        "mesh: kks_area (n=512)": lambda k: k.kks_area(1.0, 512),
        "trapezoid: transported (1e5)": lambda k: k.transported_trapezoid(t, mats, vel),
    }


def best(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    nb, npy = get_backend("numba"), get_backend("numpy")
    print(f"{'kernel':38s} {'jit s':>8s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}  agree")
    for name, fn in cases(np.random.default_rng(args.seed)).items():
        t0 = time.perf_counter()
        a = fn(nb)
        jit = time.perf_counter() - t0
        b = fn(npy)
        agree = np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=1e-12, atol=0)
        tn, tp = best(lambda: fn(nb), args.repeat), best(lambda: fn(npy), args.repeat)
        print(f"{name:38s} {jit:8.2f} {1e3 * tn:10.2f} {1e3 * tp:10.2f} {tp / tn:7.1f}x  {agree}")


if __name__ == "__main__":
    main()
