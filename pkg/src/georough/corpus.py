"""Deterministic fixture generators and lifted Brownian motion."""
from __future__ import annotations

import warnings

import numpy as np
from scipy.special import ndtri

from . import _kernels
from .errors import InvalidInput
from .paths import PiecewisePath, SampledGroupPath
from .tensor import offsets, tensor_size

MAX_LACUNARY_TERMS = 24
CHIRP_RATIO = 0.9
CHIRP_FLOOR = 1e-6


def pure_area_path(a: float = 1.0, n: int = 17) -> SampledGroupPath:
    """Y_t = exp(a t [e1, e2]) in G^2(R^2) at n uniform times."""
    if n < 2:
        raise InvalidInput("pure_area_path needs n >= 2")
    t = np.linspace(0.0, 1.0, n)
    vals = np.zeros((n, tensor_size(2, 2)))
    vals[:, 0] = 1.0
    off = offsets(2, 2)
    vals[:, off[2] + 1] = a * t
    vals[:, off[2] + 2] = -a * t
    return SampledGroupPath(t, vals, 2, 2, check=False)


def lacunary_value(t, N: int, p: float):
    t = np.asarray(t, dtype=np.float64)
    i = np.arange(1, N + 1, dtype=np.float64)
    return np.sum(2.0 ** (-i / p) * np.sin(np.multiply.outer(t, 2.0**i)), axis=-1)


def lacunary_series(N: int, p: float, n: int | None = None) -> PiecewisePath:
    """g_N(t) = sum_{i<=N} 2^(-i/p) sin(2^i t) on n uniform samples of [0, 1]."""
    if not 1 <= N <= MAX_LACUNARY_TERMS:
        raise InvalidInput(f"N must be in 1..{MAX_LACUNARY_TERMS}, got {N}")
    if n is None:
        n = 2 ** (N + 2) + 1
    if n < 2:
        raise InvalidInput("need n >= 2 samples")
    if n < 2 ** (N + 1):
        warnings.warn(f"lacunary series with N={N} is undersampled by n={n} (< 2^{N + 1})", stacklevel=2)
    t = np.linspace(0.0, 1.0, n)
    return PiecewisePath(t, lacunary_value(t, N, p)[:, None])


def chirp_value(t, p: float):
    """h(t) = t^(1/p) cos^2(pi/t) / log t for t > 0, and h(0) = 0.

    log t vanishes at t = 1, so h is only bounded on [0, 1 - eps].
    """
    t = np.asarray(t, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = t ** (1.0 / p) * np.cos(np.pi / t) ** 2 / np.log(t)
    out = np.where(t > 0, v, 0.0)
    return out if out.ndim else float(out)


def chirp_grid(n: int) -> np.ndarray:
    """Uniform n-point grid on [0, 1] merged with a geometric cluster at 0."""
    if n < 2:
        raise InvalidInput("chirp grid needs n >= 2")
    k = int(np.floor(np.log(CHIRP_FLOOR) / np.log(CHIRP_RATIO)))
    geo = CHIRP_RATIO ** np.arange(k + 1)
    return np.union1d(np.linspace(0.0, 1.0, n), np.concatenate([[0.0], geo]))


def chirp_path(p: float, n: int = 257) -> PiecewisePath:
    """The chirp on [0, 1/2], run over unit time: x(u) = h(u / 2)."""
    u = chirp_grid(n)
    return PiecewisePath(u, chirp_value(0.5 * u, p)[:, None])


# -- Brownian motion -------------------------------------------------------------


def _philox_normals(seed: int, stream: int, count: int, start: int = 0) -> np.ndarray:
    """Normals number start..start+count-1 of the counter-based stream keyed by (seed, stream).

    Each value is a function of its position alone, so any chunking of the
    stream reproduces the same numbers.
    """
    if seed < 0 or stream < 0:
        raise InvalidInput("seed and stream index must be non-negative")
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    bg = np.random.Philox(key=key)
    # Philox emits four 64-bit words per counter increment
    q, r = divmod(start, 4)
    bg.advance(q)
    raw = bg.random_raw(count + r)[r:]
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def brownian_increments(n: int, d: int, seed: int, stream: int = 0) -> np.ndarray:
    """(n, d) standard Brownian increments on the uniform n-step grid of [0, 1], n a power of two.

    Built by dyadic bridge refinement: normal number 0 sets B_1 and number
    2^(k-1) + j sets the midpoint of the j-th interval at level k.  Every
    dyadic node owns its normal, so the path for 2n restricted to the n-grid
    is bit-identical to the path for n.
    """
    if n < 1 or n & (n - 1):
        raise InvalidInput(f"n must be a power of two, got {n}")
    z = _philox_normals(seed, stream, n * d).reshape(n, d)
    W = np.zeros((2, d))
    W[1] = z[0]
    h = 1.0
    k = 1
    while W.shape[0] - 1 < n:
        cells = W.shape[0] - 1
        mid = 0.5 * (W[:-1] + W[1:]) + np.sqrt(0.25 * h) * z[k:k + cells]
        nxt = np.empty((2 * cells + 1, d))
        nxt[0::2] = W
        nxt[1::2] = mid
        W = nxt
        k += cells
        h *= 0.5
    return np.diff(W, axis=0)


def brownian_lift(n_fine: int, d: int = 2, seed: int = 0, stream: int = 0) -> SampledGroupPath:
    """Step-2 lift of the piecewise-linear interpolation of a Brownian sample."""
    if not 1 <= d <= 3:
        raise InvalidInput(f"brownian_lift supports d <= 3, got {d}")
    if n_fine < 2**8 or n_fine & (n_fine - 1):
        raise InvalidInput(f"n_fine must be a power of two >= 256, got {n_fine}")
    inc = brownian_increments(n_fine, d, seed, stream)
    vals = _kernels.chen_prefix(inc, 2)
    return SampledGroupPath(np.linspace(0.0, 1.0, n_fine + 1), vals, d, 2, check=False)
