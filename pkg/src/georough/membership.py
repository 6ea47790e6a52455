"""Wiener and Ciesielski functionals, control checks, and a verdict layer.

Everything here is computed on the sample grid, so verdicts are sampled
evidence about a limit, never a proof of it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .controls import Control, PowerControl
from .errors import InvalidInput
from .metrics import norm_kind, smallest_control
from .paths import SampledGroupPath

_SLACK = 1e-12
_BLOCK = 1 << 22  # band entries per block


@dataclass(frozen=True)
class Thresholds:
    decay_ratio: float = 0.1
    decay_slope: float = -0.25
    flat_variation: float = 0.1
    hypothesis_slope: float = 0.1


DEFAULT_THRESHOLDS = Thresholds()


def _min_gap(Y: SampledGroupPath) -> float:
    return float(np.diff(Y.times).min())


def _max_gap(Y: SampledGroupPath) -> float:
    # no subdivision has all gaps below the widest grid step
    return float(np.diff(Y.times).max())


def wiener_functional(Y: SampledGroupPath, p: float, delta: float, norm: str = "l", table=None) -> float:
    """max over grid subdivisions with all gaps <= delta of sum delta_Y^p(t_i, t_{i+1}).

    ``table`` may carry a precomputed smallest-control table for Y.
    """
    if p <= 1:
        raise InvalidInput(f"p must exceed 1, got {p}")
    gap = _max_gap(Y)
    if delta < gap - _SLACK:
        raise InvalidInput(f"delta={delta:g} is below the grid gap {gap:g}; use delta >= {gap:g} or refine the grid")
    if table is None:
        table = smallest_control(Y, p, norm).values
    return float(_kernels.gap_dp(Y.times, table, delta, _SLACK))


def wiener_profile(Y: SampledGroupPath, p: float, deltas, norm: str = "l") -> np.ndarray:
    table = smallest_control(Y, p, norm).values
    return np.array([wiener_functional(Y, p, dl, norm, table) for dl in deltas])


def ciesielski_profile(Y: SampledGroupPath, omega: Control, p: float, deltas, norm: str = "l") -> np.ndarray:
    """theta_Y(delta) for every delta in one banded sweep over the grid."""
    deltas = np.asarray(deltas, dtype=np.float64)
    if p <= 1:
        raise InvalidInput(f"p must exceed 1, got {p}")
    t = Y.times
    n = t.size
    dmax = float(deltas.max())
    gap = _min_gap(Y)
    if deltas.min() < gap - _SLACK:
        raise InvalidInput(f"no sample pairs within delta={deltas.min():g} (finest gap {gap:g})")
    # largest index lag with t_j - t_i <= dmax anywhere on the grid
    reach = np.searchsorted(t, t + dmax + _SLACK, side="right") - 1 - np.arange(n)
    max_lag = int(max(1, reach.max()))
    kind = norm_kind(norm)
    best = np.zeros(deltas.size)
    rows = max(1, _BLOCK // max_lag)
    lag = np.arange(1, max_lag + 1)
    for i0 in range(0, n - 1, rows):
        i1 = min(n - 1, i0 + rows)
        band = _kernels.band_norms(Y.values, kind, Y.d, Y.m, i0, i1, max_lag)
        j = np.arange(i0, i1)[:, None] + lag[None, :]
        valid = j < n
        jj = np.where(valid, j, n - 1)
        s = np.broadcast_to(t[i0:i1, None], jj.shape)
        w = np.asarray(omega(s, t[jj]), dtype=np.float64)
        if np.any((w <= 0) & valid):
            raise InvalidInput("control vanishes at an off-diagonal sample pair")
        ratio = np.where(valid, band / np.where(valid, w, 1.0) ** (1.0 / p), -np.inf)
        # spans grow with the lag, so each delta selects a prefix of every row
        run = np.maximum.accumulate(ratio, axis=1)
        rows_i = np.arange(i0, i1)
        for q, dl in enumerate(deltas):
            L = np.searchsorted(t, t[i0:i1] + dl + _SLACK, side="right") - 1 - rows_i
            L = np.minimum(L, max_lag)
            ok = L >= 1
            if ok.any():
                best[q] = max(best[q], float(run[ok, L[ok] - 1].max()))
    return best


def ciesielski_modulus(Y: SampledGroupPath, omega: Control, p: float, delta: float, norm: str = "l") -> float:
    """sup over sampled pairs with t - s <= delta of ||Y_{s,t}|| / omega(s,t)^(1/p)."""
    return float(ciesielski_profile(Y, omega, p, [delta], norm)[0])


# -- control conditions -----------------------------------------------------------


def check_control(omega: Control, p: float, grid=65, deltas=None, tol: float = 1e-12) -> dict:
    """Superadditivity, the (H_p) comparability constant and the condHPP profile on a grid.

    ``grid`` is a point count (uniform on [0, 1]) or an explicit time array.
    H_p is taken over nested intervals r <= s < t <= u; condHPP(delta) is
    sup_{0 < t-s <= delta} (t-s) / omega(s,t)^(1/p).
    """
    t = np.linspace(0.0, 1.0, int(grid)) if np.isscalar(grid) else np.asarray(grid, dtype=np.float64)
    G = t.size
    S, T = np.meshgrid(t, t, indexing="ij")
    W = np.asarray(omega(S, T), dtype=np.float64)
    iu = np.triu_indices(G, 1)
    diag_ok = bool(np.all(np.abs(np.diag(W)) <= tol))
    # W[i,j] + W[j,k] <= W[i,k] for i < j < k
    worst = 0.0
    for j in range(1, G - 1):
        lhs = W[:j, j][:, None] + W[j, j + 1:][None, :]
        worst = max(worst, float((lhs - W[:j, j + 1:]).max()))
    superadditive = worst <= tol * max(1.0, float(np.abs(W).max())) and diag_ok
    span = np.where(T > S, T - S, 1.0)
    R = np.where(T > S, W / span**p, 0.0)
    # M[i, j] = max_{r <= i, u >= j} R[r, u]
    M = R.copy()
    for i in range(1, G):
        M[i] = np.maximum(M[i], M[i - 1])
    for j in range(G - 2, -1, -1):
        M[:, j] = np.maximum(M[:, j], M[:, j + 1])
    inner = R[iu]
    outer = M[iu]
    if np.any((inner <= 0) & (outer > 0)):
        hp = float("inf")
    else:
        pos = inner > 0
        hp = float((outer[pos] / inner[pos]).max()) if pos.any() else float("nan")
    h = float(np.diff(t).min())
    if deltas is None:
        deltas = [2.0**-k for k in range(0, 40) if 2.0**-k >= h - _SLACK]
    deltas = np.asarray(deltas, dtype=np.float64)
    gaps = (T - S)[iu]
    wv = W[iu]
    ratio = np.where(wv > 0, gaps / np.where(wv > 0, wv, 1.0) ** (1.0 / p), np.inf)
    prof = np.array([float(ratio[gaps <= dl + _SLACK].max()) for dl in deltas])
    return {
        "superadditive": bool(superadditive),
        "superadditivity_violation": max(0.0, worst),
        "zero_on_diagonal": diag_ok,
        "Hp_constant": hp,
        "Hp_holds": bool(np.isfinite(hp)),
        "condHPP_deltas": deltas.tolist(),
        "condHPP_profile": prof.tolist(),
        "condHPP_limit": float(prof[-1]),
    }


# -- verdicts --------------------------------------------------------------------


def trend_slope(deltas, values) -> float:
    """Least-squares slope of log F against log(1/delta); -inf flags an all-zero tail."""
    deltas = np.asarray(deltas, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    pos = values > 0
    if pos.sum() < 2:
        return float("-inf") if not pos.all() else 0.0
    x = np.log(1.0 / deltas[pos])
    y = np.log(values[pos])
    return float(np.polyfit(x, y, 1)[0])


def verdict(deltas, values, th: Thresholds = DEFAULT_THRESHOLDS) -> tuple[str, float]:
    """Decision rule on a ladder ordered from the largest delta to the smallest."""
    values = np.asarray(values, dtype=np.float64)
    slope = trend_slope(deltas, values)
    top = float(values.max())
    if top == 0.0:
        return "in-closure", slope
    if values[-1] < th.decay_ratio * values[0] and slope < th.decay_slope:
        return "in-closure", slope
    if (top - values.min()) / top < th.flat_variation:
        return "not-in-closure", slope
    return "inconclusive", slope


def _ladder(Y: SampledGroupPath, ladder, gap: float) -> np.ndarray:
    lad = np.sort(np.asarray(list(ladder), dtype=np.float64))[::-1]
    if lad.size < 4:
        raise InvalidInput(f"the delta ladder needs at least 4 values, got {lad.size}")
    if np.unique(lad).size != lad.size:
        raise InvalidInput("delta ladder values must be distinct")
    if lad[-1] < gap - _SLACK or lad[0] > 1.0:
        raise InvalidInput(f"ladder must lie within [{gap:g}, 1] for this grid")
    return lad


def classify(
    Y: SampledGroupPath,
    p: float,
    mode: str = "pvar",
    ladder=None,
    omega: Control | None = None,
    norm: str = "l",
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> dict:
    """Functional values along a delta ladder, their trend, and a verdict."""
    if ladder is None:
        ladder = [2.0**-k for k in range(1, 6)]
    lad = _ladder(Y, ladder, _max_gap(Y) if mode == "pvar" else _min_gap(Y))
    record = {"mode": mode, "p": float(p), "norm": norm, "ladder": lad.tolist(), "evidence": "sampled evidence"}
    if mode == "pvar":
        vals = wiener_profile(Y, p, lad, norm)
        record["hypotheses"] = "n/a"
    elif mode == "modulus":
        omega = omega if omega is not None else PowerControl(1.0)
        vals = ciesielski_profile(Y, omega, p, lad, norm)
        grid = Y.times if len(Y) <= 257 else np.linspace(0.0, 1.0, 257)
        rep = check_control(omega, p, grid, deltas=lad)
        prof = rep["condHPP_profile"]
        decays = prof[-1] == 0.0 or trend_slope(lad, prof) < -thresholds.hypothesis_slope
        ok = rep["superadditive"] and rep["Hp_holds"] and decays
        record["control"] = omega.describe()
        record["hypotheses"] = "ok" if ok else "outside theorem hypotheses"
    else:
        raise InvalidInput(f"mode must be 'pvar' or 'modulus', got {mode!r}")
    v, slope = verdict(lad, vals, thresholds)
    record["values"] = [float(x) for x in vals]
    record["slope"] = slope
    record["verdict"] = v
    return record
