"""Compare the compiled kernels with the pure-Python fallback.

Usage::

    python benchmarks/bench_kernels.py [--n-samples 20000]

Both backends get identical inputs; the script checks that they agree and
prints the throughput of each.
"""
import argparse
import time

import numpy as np

from entromax import _kernels_py
from entromax.rng import RandomStreams
from entromax.sampler import COND_MAX, SimplexDensity

try:
    from entromax import _kernels as _compiled
except ImportError:
    _compiled = None


def best_of(fn, repeat=3):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def bench_inversion(y, N):
    d = SimplexDensity(y)
    U = RandomStreams(0).stream("bench").random((N, d.n - 1))
    args = (d._wf, d._start, d._mu, d._jdeg, d._coef, d._eq, U, COND_MAX)
    rows = []
    ref = None
    for name, mod in (("compiled", _compiled), ("python", _kernels_py)):
        if mod is None:
            continue
        t, (V, status) = best_of(lambda: mod.invert_simplex_cdf(*args), 1 if mod is _kernels_py else 3)
        if ref is None:
            ref = V
        rows.append((name, t, N / t, float(np.max(np.abs(V - ref)))))
    return rows


def bench_mgs(n, k, N):
    rng = np.random.default_rng(1)
    G = rng.standard_normal((N, n, k)) + 1j * rng.standard_normal((N, n, k))
    rows = []
    ref = None
    for name, mod in (("compiled", _compiled), ("python", _kernels_py)):
        if mod is None:
            continue

        def run():
            H = G.copy()
            mod.mgs_orthonormalize(H)
            return H
        t, H = best_of(run, 1 if mod is _kernels_py else 3)
        if ref is None:
            ref = H
        rows.append((name, t, N / t, float(np.max(np.abs(H - ref)))))
    return rows


def show(title, rows):
    print(title)
    base = rows[0][1]
    for name, t, rate, dev in rows:
        print(f"  {name:9s} {t * 1e3:10.2f} ms  {rate:12.0f} /s  x{t / base:7.1f}  max dev {dev:.1e}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-samples", type=int, default=20_000)
    args = p.parse_args()
    N = args.n_samples
    if _compiled is None:
        print("compiled extension not built; timing the fallback only")
    show(f"CDF inversion, y=(2, 1, 0), N={N}", bench_inversion([2.0, 1.0, 0.0], N))
    show(f"CDF inversion, n=6 with a repeated value, N={N}",
         bench_inversion([1.5, -0.5, 0.3, 0.3, 2.0, -1.0], N))
    show(f"MGS, n=6, k=3, N={N}", bench_mgs(6, 3, N))


if __name__ == "__main__":
    main()
