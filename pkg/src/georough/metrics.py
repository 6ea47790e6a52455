"""Homogeneous norms, invariant distances and sampled path-space distances.

Level norms are max-abs coefficients.  ``lnorm`` (log coordinates) is the
default everywhere; ``tnorm`` (tensor coordinates) is available by flag.
All suprema are taken over the sample grid.
"""
from __future__ import annotations

from itertools import product as _iproduct
from math import factorial, pi, sqrt
from typing import NamedTuple

import numpy as np

from . import _kernels
from .controls import Control, TableControl
from .errors import InvalidInput, NotGroupLike, Unsupported
from .paths import SampledGroupPath
from .tensor import (
    GroupElement,
    TruncatedTensor,
    flat_inverse,
    flat_log,
    flat_mul,
    group_like_check,
    offsets,
)

_KINDS = {"l": _kernels.LNORM, "lnorm": _kernels.LNORM, "t": _kernels.TNORM, "tnorm": _kernels.TNORM}


def norm_kind(norm: str) -> int:
    try:
        return _KINDS[norm]
    except KeyError:
        raise InvalidInput(f"unknown norm {norm!r}; use 'l' or 't'") from None


def _unit(g: TruncatedTensor) -> None:
    if g.data[0] != 1.0:
        raise InvalidInput("norms are defined on elements with level 0 equal to 1")


def _as_group(g: TruncatedTensor) -> GroupElement:
    if isinstance(g, GroupElement):
        return g
    _unit(g)
    ok, res = group_like_check(g)
    if not ok:
        raise NotGroupLike(f"element is not group-like (residual {res:.2e})")
    return GroupElement._trusted(g.d, g.m, g.data)


def tnorm(g: TruncatedTensor) -> float:
    """max_k (k! |g^k|)^(1/k)."""
    _unit(g)
    return float(_kernels._np_norm_flat(g.data, _kernels.TNORM, g.d, g.m))


def lnorm(g: TruncatedTensor) -> float:
    """max_k |(log g)^k|^(1/k)."""
    g = _as_group(g)
    return float(_kernels._np_norm_flat(g.data, _kernels.LNORM, g.d, g.m))


def homogeneous_norm(g: TruncatedTensor, norm: str = "l") -> float:
    return lnorm(g) if norm_kind(norm) == _kernels.LNORM else tnorm(g)


def dist(g: TruncatedTensor, h: TruncatedTensor, side: str = "left", norm: str = "l") -> float:
    """Left: ||g^{-1} h||; right: ||g h^{-1}||."""
    if (g.d, g.m) != (h.d, h.m):
        raise InvalidInput(f"shape mismatch: (d={g.d}, m={g.m}) vs (d={h.d}, m={h.m})")
    kind = norm_kind(norm)
    if kind == _kernels.LNORM:
        g, h = _as_group(g), _as_group(h)
    else:
        _unit(g)
        _unit(h)
    if side not in ("left", "right"):
        raise InvalidInput(f"side must be 'left' or 'right', got {side!r}")
    if np.array_equal(g.data, h.data):
        # roundoff in g^{-1} g would otherwise surface as eps^(1/m)
        return 0.0
    if side == "left":
        w = flat_mul(flat_inverse(g.data, g.d, g.m), h.data, g.d, g.m)
    else:
        w = flat_mul(g.data, flat_inverse(h.data, g.d, g.m), g.d, g.m)
    return float(_kernels._np_norm_flat(w, kind, g.d, g.m))


# -- Carnot-Caratheodory bounds ------------------------------------------------


class CCBounds(NamedTuple):
    lower: float
    upper: float


def _log_level_bound(k: int) -> float:
    """B_k with |(log S)^k| <= B_k L^k for any path of length L (max-abs levels).

    Signature levels obey |S^i| <= L^i / i!; expanding the log series over
    compositions of k gives B_k = sum_j (1/j) sum_{i_1+..+i_j=k} prod 1/i_r!.
    """
    # c[n][j] = sum over compositions of n into j parts of prod 1/i!
    c = np.zeros((k + 1, k + 1))
    c[0, 0] = 1.0
    for n in range(1, k + 1):
        for j in range(1, n + 1):
            c[n, j] = sum(c[n - i, j - 1] / factorial(i) for i in range(1, n - j + 2))
    return float(sum(c[k, j] / j for j in range(1, k + 1)))


def cc_lower(g: TruncatedTensor) -> float:
    """A lower bound on the CC norm (the length of any path with signature g).

    Terms: the chord |g^1|; a planar isoperimetric bound from the largest
    signed area among 2-plane projections of the level-2 log; and for every
    level the bound (|ell^k| / B_k)^(1/k).
    """
    g = _as_group(g)
    d, m = g.d, g.m
    off = offsets(d, m)
    ell = flat_log(g.data, d, m)
    chord = ell[off[1]:off[2]]
    best = float(np.linalg.norm(chord))
    for k in range(2, m + 1):
        mx = float(np.abs(ell[off[k]:off[k + 1]]).max())
        best = max(best, (mx / _log_level_bound(k)) ** (1.0 / k))
    if m >= 2 and d >= 2:
        area = ell[off[2]:off[3]].reshape(d, d)
        area = 0.5 * (area - area.T)
        u, s, vt = np.linalg.svd(area)
        a = float(s[0])
        if a > 0:
            # projected chord onto the maximizing plane span(u0, v0)
            plane = np.stack([u[:, 0], vt[0]])
            q, _ = np.linalg.qr(plane.T)
            pc = float(np.linalg.norm(q.T @ chord))
            # closing the projected curve with its chord; or reflecting it across the chord
            best = max(best, 2.0 * sqrt(pi * a) - pc, sqrt(2.0 * pi * a))
    return best


def cc_bounds(g: TruncatedTensor) -> CCBounds:
    """(lower, upper) with lower <= ||g||_CC <= upper; the upper bound is a realized length."""
    g = _as_group(g)
    if g.m > 3:
        raise Unsupported(f"constructive upper bound is available for m <= 3, got m={g.m}")
    from .realizer import realize

    return CCBounds(cc_lower(g), realize(g).length)


# -- sampled path distances ------------------------------------------------------


def _check_pair(X: SampledGroupPath, Y: SampledGroupPath) -> None:
    if not X.same_grid(Y):
        raise InvalidInput("paths must share (d, m) and the sample grid; resample first")


def _side_flag(side: str) -> bool:
    if side not in ("left", "right"):
        raise InvalidInput(f"side must be 'left' or 'right', got {side!r}")
    return side == "right"


def distance_table(X: SampledGroupPath, Y: SampledGroupPath, norm: str = "l", side: str = "left") -> np.ndarray:
    """Upper-triangular table dist(X_{t_i,t_j}, Y_{t_i,t_j})."""
    _check_pair(X, Y)
    return _kernels.pair_dists(X.values, Y.values, norm_kind(norm), _side_flag(side), X.d, X.m)


def norm_table(Y: SampledGroupPath, norm: str = "l") -> np.ndarray:
    """Upper-triangular table ||Y_{t_i,t_j}||."""
    return _kernels.pair_norms(Y.values, norm_kind(norm), Y.d, Y.m)


def sup_distances(X: SampledGroupPath, Y: SampledGroupPath, norm: str = "l", side: str = "left") -> tuple[float, float]:
    """(d_inf, d_inf_tilde): sup over pairs of increment distances, and sup over times of pointwise distance."""
    D = distance_table(X, Y, norm, side)
    # row 0 holds dist(X_t, Y_t) since X_0 = Y_0 = 1
    return float(D.max()), float(D[0].max())


def sup_norm(Y: SampledGroupPath, norm: str = "l") -> float:
    """sup over sampled pairs of ||Y_{s,t}||."""
    return float(norm_table(Y, norm).max())


def _control_table(omega: Control, times: np.ndarray) -> np.ndarray:
    s, t = np.meshgrid(times, times, indexing="ij")
    return np.asarray(omega(s, t), dtype=np.float64)


def modulus_distance(X: SampledGroupPath, Y: SampledGroupPath, omega: Control, p: float, norm: str = "l", side: str = "left") -> float:
    """sup_{s<t} dist(X_{s,t}, Y_{s,t}) / omega(s,t)^(1/p) over sampled pairs."""
    if p <= 1:
        raise InvalidInput(f"p must exceed 1, got {p}")
    D = distance_table(X, Y, norm, side)
    W = _control_table(omega, X.times)
    iu = np.triu_indices(len(X), 1)
    w = W[iu]
    if np.any(w <= 0):
        raise InvalidInput("control vanishes at an off-diagonal sample pair")
    return float(np.max(D[iu] / w ** (1.0 / p)))


def pvar_distance(X: SampledGroupPath, Y: SampledGroupPath, p: float, norm: str = "l", side: str = "left") -> float:
    """Exact sup over grid subdivisions of (sum dist(X_{t_i,t_{i+1}}, Y_{t_i,t_{i+1}})^p)^(1/p)."""
    if p < 1:
        raise InvalidInput(f"p must be at least 1, got {p}")
    D = distance_table(X, Y, norm, side)
    best = _kernels.pvar_dp(D**p)
    return float(best[-1] ** (1.0 / p))


def pvar_norm(Y: SampledGroupPath, p: float, norm: str = "l") -> float:
    """||Y||_{p-var} on the sample grid."""
    if p < 1:
        raise InvalidInput(f"p must be at least 1, got {p}")
    best = _kernels.pvar_dp(norm_table(Y, norm) ** p)
    return float(best[-1] ** (1.0 / p))


def smallest_control(Y: SampledGroupPath, p: float, norm: str = "l") -> TableControl:
    """delta_Y^p(t_i, t_j): sup over grid subdivisions of [t_i, t_j] of sum ||Y_{t_k,t_{k+1}}||^p."""
    if p < 1:
        raise InvalidInput(f"p must be at least 1, got {p}")
    table = _kernels.smallest_control(norm_table(Y, norm) ** p)
    return TableControl(Y.times, table)


def brute_force_control(P: np.ndarray) -> np.ndarray:
    """Exhaustive-enumeration twin of the smallest-control DP, for small grids."""
    n = P.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            inner = list(range(i + 1, j))
            best = -np.inf
            for mask in _iproduct((0, 1), repeat=len(inner)):
                pts = [i] + [k for k, b in zip(inner, mask) if b] + [j]
                best = max(best, sum(P[a, b] for a, b in zip(pts[:-1], pts[1:])))
            out[i, j] = best
    return out
