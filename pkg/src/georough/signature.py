"""Signatures of piecewise-linear paths.

A straight segment with increment v has signature exp(v); a
piecewise-linear path's signature is the left-to-right product of its
segment exponentials (Chen).  Products are accumulated with compensated
summation per coefficient, in a fixed order, so results are bit-stable.
"""
from __future__ import annotations

from typing import Iterable

import numpy as np

from . import _kernels
from .errors import InvalidInput
from .paths import PiecewisePath, SampledGroupPath
from .tensor import GroupElement, group_exp


def segment_signature(delta: Iterable[float], m: int) -> GroupElement:
    """exp(delta) in G^m(R^d)."""
    return group_exp(delta, m)


def path_signature(x: PiecewisePath, s: float, t: float, m: int) -> GroupElement:
    """S_m(x)_{s,t}; s and t may fall inside segments."""
    if s > t:
        raise InvalidInput(f"need s <= t, got s={s}, t={t}")
    pieces = x.pieces(s, t)
    if pieces.shape[0] == 0:
        return GroupElement.identity(x.dim, m)
    vals = _kernels.chen_prefix(pieces, m)
    return GroupElement._trusted(x.dim, m, vals[-1])


def signature_prefix(x: PiecewisePath, m: int) -> np.ndarray:
    """S_m(x)_{0,t_k} at every vertex time, shape (len(x), D)."""
    return _kernels.chen_prefix(x.increments, m)


def lift(x: PiecewisePath, m: int, times: Iterable[float] | None = None) -> SampledGroupPath:
    """Sample t -> S_m(x)_{0,t} on a grid (the vertex times by default).

    The path is extended constantly to t = 1 when its last vertex is earlier.
    """
    if times is None:
        ts = np.asarray(x.times, dtype=np.float64)
        if ts[-1] < 1.0:
            ts = np.append(ts, 1.0)
    else:
        ts = np.asarray(list(times), dtype=np.float64)
    if ts[0] != 0.0 or ts[-1] != 1.0:
        raise InvalidInput("lift times must run from 0 to 1")
    # prefix over the union of vertices and query times, then pick the queries
    knots = np.union1d(x.times, ts)
    knots = knots[knots <= max(ts[-1], x.times[-1])]
    pts = x.points_at(knots)
    vals = _kernels.chen_prefix(np.diff(pts, axis=0), m)
    idx = np.searchsorted(knots, ts)
    return SampledGroupPath(ts, vals[idx], x.dim, m, check=False)
