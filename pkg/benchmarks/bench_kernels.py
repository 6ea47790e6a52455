"""Time each kernel under numba and under the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 512] [--repeat 3]

The numba column excludes compilation (one warm-up call first).
"""
import argparse
import time

import numpy as np

from georough import _config, _kernels, brownian_lift


def best_of(fn, repeat):
    out = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out = min(out, time.perf_counter() - t0)
    return out


def cases(n):
    Y = brownian_lift(max(256, 1 << int(np.ceil(np.log2(n)))), 2, 0)
    vals = Y.values[:n]
    rng = np.random.default_rng(0)
    P = _kernels.pair_norms(vals, _kernels.LNORM, 2, 2) ** 2.1
    table = _kernels.smallest_control(P)
    t = np.linspace(0, 1, n)
    inc = rng.normal(size=(20 * n, 3)) / np.sqrt(20 * n)
    return {
        "pair_norms": lambda: _kernels.pair_norms(vals, _kernels.LNORM, 2, 2),
        "pair_dists": lambda: _kernels.pair_dists(vals, vals[::-1].copy(), _kernels.LNORM, False, 2, 2),
        "band_norms": lambda: _kernels.band_norms(vals, _kernels.LNORM, 2, 2, 0, n - 1, 64),
        "pvar_dp": lambda: _kernels.pvar_dp(P),
        "smallest_control": lambda: _kernels.smallest_control(P),
        "gap_dp": lambda: _kernels.gap_dp(t, table, 0.25, 1e-12),
        "chen_prefix m=4": lambda: _kernels.chen_prefix(inc, 4),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, default=512, help="grid points")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<18}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for name, fn in cases(args.n).items():
        _config.USE_NUMBA = True
        fn()
        tn = best_of(fn, args.repeat)
        _config.USE_NUMBA = False
        tp = best_of(fn, args.repeat)
        print(f"{name:<18}{tn:>12.4f}{tp:>12.4f}{tp / tn:>10.1f}")
    _config.USE_NUMBA = True


if __name__ == "__main__":
    main()
