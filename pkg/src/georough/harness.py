"""Strong-convergence experiments for Stratonovich SDEs with interpolated drivers.

A driver is piecewise linear, so on a segment with increment v and
duration h the SDE becomes the ODE dX/du = h V0(t0 + h u, X) + V(t0 + h u, X) v,
u in [0, 1], integrated with classical RK4.  Working in u keeps
zero-length segments harmless.

Monte-Carlo trajectories are processed in fixed-size chunks; threads only
decide which worker runs a chunk, so results do not depend on the thread
count.
"""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .corpus import brownian_increments
from .errors import InvalidInput
from .paths import PiecewisePath
from .realizer import realize_m2_batch
from .tensor import offsets, tensor_size

CHUNK = 64
MIN_FINE_RATIO = 32
SCHEMES = ("linear", "geodesic_m2")


@dataclass(frozen=True)
class SdeSystem:
    """dX = V0(t, X) dt + V(t, X) o dB with X in R^e and B in R^d.

    V0(t, X) maps (M,), (M, e) -> (M, e); V(t, X) maps to (M, e, d).
    ``exact(x0, b)`` gives X_1 from the terminal driver value when the
    vector fields commute.
    """

    name: str
    state_dim: int
    driver_dim: int
    V0: Callable
    V: Callable
    x0: tuple
    exact: Callable | None = None
    lipschitz_note: str = ""


def _zero_drift(t, x):
    return np.zeros_like(x)


def _scalar_linear_V(t, x):
    return x[:, :, None]


def _planar_V(t, x):
    # columns A1 x and A2 x with A1 = [[0,1],[0,0]], A2 = [[0,0],[1,0]]
    out = np.zeros(x.shape + (2,))
    out[:, 0, 0] = x[:, 1]
    out[:, 1, 1] = x[:, 0]
    return out


def _sigma(x):
    return 1.0 + 0.5 * np.sin(x)


def _commuting_V(t, x):
    return _sigma(x)[:, :, None]


def commuting_flow(x0: float, b: float) -> float:
    """F(b) with F' = sigma(F), F(0) = x0: solve int_{x0}^{F} dy / sigma(y) = b."""
    if b == 0.0:
        return float(x0)

    def g(y):
        return quad(lambda z: 1.0 / _sigma(z), x0, y, epsabs=1e-14, epsrel=1e-13)[0] - b

    # sigma lies in [0.5, 1.5], so F - x0 lies between b/2 and 3b/2 in size
    lo, hi = (x0 + 0.4 * b, x0 + 1.6 * b) if b > 0 else (x0 + 1.6 * b, x0 + 0.4 * b)
    return float(brentq(g, lo, hi, xtol=1e-15, rtol=1e-15))


SYSTEMS = {
    "scalar_linear": SdeSystem(
        "scalar_linear", 1, 1, _zero_drift, _scalar_linear_V, (1.0,),
        exact=lambda x0, b: np.asarray(x0) * np.exp(b),
        lipschitz_note="linear field, globally Lipschitz",
    ),
    "planar_noncommuting": SdeSystem(
        "planar_noncommuting", 2, 2, _zero_drift, _planar_V, (1.0, 0.0),
        lipschitz_note="linear fields with [A1, A2] = diag(1, -1) != 0",
    ),
    "commuting_scalar": SdeSystem(
        "commuting_scalar", 1, 1, _zero_drift, _commuting_V, (0.0,),
        exact=lambda x0, b: np.array([commuting_flow(float(x0[0]), float(v)) for v in np.atleast_1d(b)]),
        lipschitz_note="sigma = 1 + 0.5 sin x has |sigma'| <= 0.5",
    ),
}


def get_system(name: str) -> SdeSystem:
    try:
        return SYSTEMS[name]
    except KeyError:
        raise InvalidInput(f"unknown system {name!r}; choose from {sorted(SYSTEMS)}") from None


# -- integrator -----------------------------------------------------------------


def _field(system: SdeSystem, t, x, h, v):
    drive = np.einsum("med,md->me", system.V(t, x), v)
    return h[:, None] * system.V0(t, x) + drive


def solve_segments(system: SdeSystem, x0: np.ndarray, t0: np.ndarray, dur: np.ndarray, inc: np.ndarray, steps: int) -> np.ndarray:
    """Batched RK4 over K segments: x0 (M, e), t0 and dur (M, K), inc (M, K, d) -> X at segment ends (M, K+1, e)."""
    M, K, _ = inc.shape
    x = np.array(x0, dtype=np.float64, copy=True)
    out = np.empty((M, K + 1, x.shape[1]))
    out[:, 0] = x
    du = 1.0 / steps
    for k in range(K):
        h = dur[:, k]
        v = inc[:, k]
        for s in range(steps):
            u = s * du
            t = t0[:, k] + h * u
            k1 = _field(system, t, x, h, v)
            k2 = _field(system, t + 0.5 * du * h, x + 0.5 * du * k1, h, v)
            k3 = _field(system, t + 0.5 * du * h, x + 0.5 * du * k2, h, v)
            k4 = _field(system, t + du * h, x + du * k3, h, v)
            x = x + (du / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[:, k + 1] = x
    return out


def ode_solve(system: SdeSystem, driver: PiecewisePath, steps_per_segment: int = 4, x0=None) -> np.ndarray:
    """States at the driver's vertex times, shape (len(driver), e)."""
    if driver.dim != system.driver_dim:
        raise InvalidInput(f"driver has dimension {driver.dim}, system {system.name} needs {system.driver_dim}")
    if steps_per_segment < 1:
        raise InvalidInput("steps_per_segment must be positive")
    x0 = np.asarray(system.x0 if x0 is None else x0, dtype=np.float64).reshape(1, -1)
    if x0.shape[1] != system.state_dim:
        raise InvalidInput(f"x0 must have {system.state_dim} entries")
    inc = driver.increments[None]
    t0 = driver.times[None, :-1]
    dur = np.diff(driver.times)[None]
    return solve_segments(system, x0, t0, dur, inc, steps_per_segment)[0]


# -- coarse drivers ---------------------------------------------------------------


def block_signatures(fine_inc: np.ndarray, n: int) -> np.ndarray:
    """Step-2 signatures of the fine piecewise-linear driver over n equal blocks: (M, n, D)."""
    M, N, d = fine_inc.shape
    r = N // n
    blocks = fine_inc.reshape(M, n, r, d)
    pos = np.cumsum(blocks, axis=2) - blocks  # position before each fine step, relative to block start
    lvl2 = np.einsum("mbri,mbrj->mbij", pos, blocks) + 0.5 * np.einsum("mbri,mbrj->mbij", blocks, blocks)
    off = offsets(d, 2)
    out = np.zeros((M, n, tensor_size(d, 2)))
    out[..., 0] = 1.0
    out[..., off[1]:off[2]] = blocks.sum(axis=2)
    out[..., off[2]:off[3]] = lvl2.reshape(M, n, d * d)
    return out


def linear_driver(fine_inc: np.ndarray, n: int):
    M, N, d = fine_inc.shape
    inc = fine_inc.reshape(M, n, N // n, d).sum(axis=2)
    t0 = np.broadcast_to(np.arange(n) / n, (M, n))
    dur = np.full((M, n), 1.0 / n)
    return t0, dur, inc


def geodesic_m2_driver(fine_inc: np.ndarray, n: int):
    """Interpolant of the coarse step-2 samples: half chords around the area loops, unit speed per block."""
    M, N, d = fine_inc.shape
    sig = block_signatures(fine_inc, n)
    seg = realize_m2_batch(sig.reshape(M * n, -1), d)  # (M n, S, d)
    S = seg.shape[1]
    lens = np.linalg.norm(seg, axis=2)
    tot = lens.sum(axis=1, keepdims=True)
    frac = np.divide(lens, tot, out=np.full_like(lens, 1.0 / S), where=tot > 0)
    dur = (frac / n).reshape(M, n * S)
    start = np.cumsum(frac, axis=1) - frac
    t0 = ((np.arange(n)[None, :, None] + start.reshape(M, n, S)) / n).reshape(M, n * S)
    return t0, dur, seg.reshape(M, n * S, d)


# -- experiment -------------------------------------------------------------------


def _terminal_errors(system, fine_inc, n_ladder, schemes, steps, truth_mode):
    M, N, d = fine_inc.shape
    x0 = np.broadcast_to(np.asarray(system.x0, dtype=np.float64), (M, system.state_dim))
    if truth_mode == "exact":
        b = fine_inc.sum(axis=1)
        truth = np.stack([np.atleast_1d(system.exact(system.x0, b[i, 0])) for i in range(M)])
    else:
        t0 = np.broadcast_to(np.arange(N) / N, (M, N))
        dur = np.full((M, N), 1.0 / N)
        truth = solve_segments(system, x0, t0, dur, fine_inc, 1)[:, -1]
    errs = {}
    for scheme in schemes:
        for n in n_ladder:
            if scheme == "linear":
                t0, dur, inc = linear_driver(fine_inc, n)
            else:
                t0, dur, inc = geodesic_m2_driver(fine_inc, n)
            xT = solve_segments(system, x0, t0, dur, inc, steps)[:, -1]
            errs[(scheme, n)] = np.sum((xT - truth) ** 2, axis=1)
    return errs


def validate_config(cfg: dict) -> dict:
    required = ("system", "n_ladder", "fine_n", "M", "seed", "schemes")
    missing = [k for k in required if k not in cfg]
    if missing:
        raise InvalidInput(f"config is missing {', '.join(missing)}")
    out = dict(cfg)
    system = get_system(cfg["system"])
    ladder = sorted(int(n) for n in cfg["n_ladder"])
    if len(ladder) < 4:
        raise InvalidInput(f"n_ladder needs at least 4 points, got {len(ladder)}")
    fine_n = int(cfg["fine_n"])
    if fine_n < 2**8 or fine_n & (fine_n - 1):
        raise InvalidInput("fine_n must be a power of two >= 256")
    for n in ladder:
        if n < 1 or fine_n % n:
            raise InvalidInput(f"fine_n={fine_n} is not a multiple of n={n}")
        if fine_n < MIN_FINE_RATIO * n:
            raise InvalidInput(f"fine_n must be at least {MIN_FINE_RATIO} times every n (fine_n={fine_n}, n={n})")
    schemes = list(cfg["schemes"])
    bad = [s for s in schemes if s not in SCHEMES]
    if bad or not schemes:
        raise InvalidInput(f"schemes must be a non-empty subset of {list(SCHEMES)}")
    truth = cfg.get("truth", "fine")
    if truth not in ("fine", "exact"):
        raise InvalidInput("truth must be 'fine' or 'exact'")
    if truth == "exact" and system.exact is None:
        raise InvalidInput(f"system {system.name} has no closed form")
    M = int(cfg["M"])
    if M < 1:
        raise InvalidInput("M must be positive")
    out.update(n_ladder=ladder, fine_n=fine_n, M=M, seed=int(cfg["seed"]), schemes=schemes,
               steps_per_segment=int(cfg.get("steps_per_segment", 4)), truth=truth)
    return out


def fit_slope(ns, errors) -> float:
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errors, float)), 1)[0])


def convergence_experiment(config: dict, threads: int | None = None) -> dict:
    """L2 terminal errors per (scheme, n) and fitted log-log slopes."""
    cfg = validate_config(config)
    system = get_system(cfg["system"])
    M, N, d = cfg["M"], cfg["fine_n"], system.driver_dim
    chunks = [(a, min(M, a + CHUNK)) for a in range(0, M, CHUNK)]

    def run(chunk):
        a, b = chunk
        fine = np.stack([brownian_increments(N, d, cfg["seed"], stream=i) for i in range(a, b)])
        return _terminal_errors(system, fine, cfg["n_ladder"], cfg["schemes"], cfg["steps_per_segment"], cfg["truth"])

    workers = threads if threads else (os.cpu_count() or 1)
    t_start = time.perf_counter()
    if workers <= 1:
        parts = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    rows = []
    slopes = {}
    for scheme in cfg["schemes"]:
        errs = []
        for n in cfg["n_ladder"]:
            # fixed-order reduction: concatenate chunks by index, then one sum
            sq = np.concatenate([p[(scheme, n)] for p in parts])
            e = float(np.sqrt(np.sum(sq) / M))
            se = float(np.std(sq) / np.sqrt(M) / (2 * e)) if e > 0 else 0.0
            errs.append(e)
            rows.append({"scheme": scheme, "n": n, "L2_error": e, "L2_stderr": se})
        slopes[scheme] = fit_slope(cfg["n_ladder"], errs)
    for r in rows:
        r["fitted_slope"] = slopes[r["scheme"]]
    return {
        "config": {k: cfg[k] for k in ("system", "n_ladder", "fine_n", "M", "seed", "schemes", "steps_per_segment", "truth")},
        "rows": rows,
        "slopes": slopes,
        "runtime_s": time.perf_counter() - t_start,
    }


def table_csv(result: dict) -> str:
    lines = ["scheme,n,L2_error,L2_stderr,fitted_slope"]
    for r in result["rows"]:
        lines.append(f"{r['scheme']},{r['n']},{r['L2_error']!r},{r['L2_stderr']!r},{r['fitted_slope']!r}")
    return "\n".join(lines) + "\n"


def summary_json(result: dict) -> str:
    return json.dumps(result, indent=2)
