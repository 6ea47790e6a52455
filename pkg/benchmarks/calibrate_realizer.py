"""Estimate sup length / lnorm of the constructive realization per (d, m).

Random Lie elements with independent per-level scales, followed by local
maximization (Nelder-Mead) from the worst samples.  The frozen constants in
georough.realizer are the reported worst ratio times a safety margin.
"""
import argparse

import numpy as np
from scipy.optimize import minimize

from georough.lyndon import bracket_matrix
from georough.metrics import lnorm
from georough.realizer import realize_increments
from georough.tensor import GroupElement, flat_exp, offsets


def element(coef, d, m):
    off = offsets(d, m)
    x = np.zeros(off[-1])
    pos = 0
    for k in range(1, m + 1):
        B = bracket_matrix(d, k)
        x[off[k]:off[k + 1]] = B @ coef[pos:pos + B.shape[1]]
        pos += B.shape[1]
    return GroupElement._trusted(d, m, flat_exp(x, d, m))


def ratio(coef, d, m):
    g = element(coef, d, m)
    n = lnorm(g)
    if n == 0:
        return 0.0
    inc = realize_increments(g)
    return float(np.linalg.norm(inc, axis=1).sum()) / n


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    for d in (2, 3):
        for m in (2, 3):
            sizes = [bracket_matrix(d, k).shape[1] for k in range(1, m + 1)]
            n = sum(sizes)
            found = []
            for _ in range(args.samples):
                scales = np.concatenate([np.full(s, 10 ** rng.uniform(-2, 1)) for s in sizes])
                c = rng.normal(size=n) * scales
                found.append((ratio(c, d, m), c))
            found.sort(key=lambda r: -r[0])
            best = found[0][0]
            for _, c in found[:10]:
                res = minimize(lambda z: -ratio(z, d, m), c, method="Nelder-Mead",
                               options={"maxiter": 4000, "xatol": 1e-10, "fatol": 1e-12})
                best = max(best, -res.fun)
            print(f"d={d} m={m} worst sampled={found[0][0]:.4f} after search={best:.4f}")


if __name__ == "__main__":
    main()
