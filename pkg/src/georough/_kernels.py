"""Hot loops: pair-increment norms, variation DPs, Chen prefix products.

Every kernel has two implementations with identical semantics: a numba
``@njit`` loop nest and a vectorized numpy path.  ``GEOROUGH_DISABLE_NUMBA=1``
(or a missing numba) selects numpy.  The public names at the bottom dispatch
on ``_config.USE_NUMBA`` at call time, so tests can flip the switch.

Norm kinds: 0 = log-coordinate norm max_k |l^k|^(1/k); 1 = tensor-level norm
max_k (k! |g^k|)^(1/k).  Level norms are the max-abs coefficient.
"""
from __future__ import annotations

from math import factorial

import numpy as np

from . import _config
from .tensor import flat_inverse, flat_log, flat_mul, offsets

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


LNORM = 0
TNORM = 1


def _offs(d, m):
    return np.asarray(offsets(d, m), dtype=np.int64)


# ---------------------------------------------------------------------------
# numba implementations


@njit(cache=True, inline="always")
def _nb_mul(a, b, out, d, m, offs):
    for idx in range(out.size):
        out[idx] = 0.0
    for k in range(m + 1):
        for i in range(k + 1):
            j = k - i
            nj = offs[j + 1] - offs[j]
            for p in range(offs[i + 1] - offs[i]):
                ap = a[offs[i] + p]
                if ap == 0.0:
                    continue
                base = offs[k] + p * nj
                for q in range(nj):
                    out[base + q] += ap * b[offs[j] + q]


@njit(cache=True, inline="always")
def _nb_log(g, out, x, xp, tmp, d, m, offs):
    # out = sum_n (-1)^(n+1) x^n / n, x = g - 1
    n_tot = g.size
    for idx in range(n_tot):
        x[idx] = g[idx]
        xp[idx] = g[idx]
        out[idx] = g[idx]
    x[0] = 0.0
    xp[0] = 0.0
    out[0] = 0.0
    for n in range(2, m + 1):
        _nb_mul(xp, x, tmp, d, m, offs)
        c = (-1.0) ** (n + 1) / n
        for idx in range(n_tot):
            xp[idx] = tmp[idx]
            out[idx] += c * tmp[idx]


@njit(cache=True, inline="always")
def _nb_inverse(g, out, x, xp, tmp, d, m, offs):
    n_tot = g.size
    for idx in range(n_tot):
        x[idx] = g[idx]
        xp[idx] = g[idx]
        out[idx] = -g[idx]
    x[0] = 0.0
    xp[0] = 0.0
    out[0] = 1.0
    for n in range(2, m + 1):
        _nb_mul(xp, x, tmp, d, m, offs)
        c = (-1.0) ** n
        for idx in range(n_tot):
            xp[idx] = tmp[idx]
            out[idx] += c * tmp[idx]


@njit(cache=True, inline="always")
def _nb_norm_of(g, kind, lg, x, xp, tmp, d, m, offs):
    if kind == 0:
        _nb_log(g, lg, x, xp, tmp, d, m, offs)
        src = lg
    else:
        src = g
    best = 0.0
    fact = 1.0
    for k in range(1, m + 1):
        fact *= k
        mx = 0.0
        for idx in range(offs[k], offs[k + 1]):
            v = abs(src[idx])
            if v > mx:
                mx = v
        if kind == 1:
            mx *= fact
        if k == 1:
            val = mx
        elif k == 2:
            val = np.sqrt(mx)
        else:
            val = mx ** (1.0 / k)
        if val > best:
            best = val
    return best


@njit(cache=True)
def _nb_pair_norms(values, kind, d, m, offs):
    n, D = values.shape
    out = np.zeros((n, n))
    inv = np.empty(D)
    inc = np.empty(D)
    lg = np.empty(D)
    x = np.empty(D)
    xp = np.empty(D)
    tmp = np.empty(D)
    for i in range(n):
        _nb_inverse(values[i], inv, x, xp, tmp, d, m, offs)
        for j in range(i + 1, n):
            _nb_mul(inv, values[j], inc, d, m, offs)
            out[i, j] = _nb_norm_of(inc, kind, lg, x, xp, tmp, d, m, offs)
    return out


@njit(cache=True)
def _nb_pair_dists(xv, yv, kind, right, d, m, offs):
    n, D = xv.shape
    out = np.zeros((n, n))
    invx = np.empty(D)
    invy = np.empty(D)
    xinc = np.empty(D)
    yinc = np.empty(D)
    aux = np.empty(D)
    w = np.empty(D)
    lg = np.empty(D)
    x = np.empty(D)
    xp = np.empty(D)
    tmp = np.empty(D)
    for i in range(n):
        _nb_inverse(xv[i], invx, x, xp, tmp, d, m, offs)
        _nb_inverse(yv[i], invy, x, xp, tmp, d, m, offs)
        for j in range(i + 1, n):
            _nb_mul(invx, xv[j], xinc, d, m, offs)
            _nb_mul(invy, yv[j], yinc, d, m, offs)
            if right:
                # X_ij (Y_ij)^-1
                _nb_inverse(yinc, aux, x, xp, tmp, d, m, offs)
                _nb_mul(xinc, aux, w, d, m, offs)
            else:
                _nb_inverse(xinc, aux, x, xp, tmp, d, m, offs)
                _nb_mul(aux, yinc, w, d, m, offs)
            out[i, j] = _nb_norm_of(w, kind, lg, x, xp, tmp, d, m, offs)
    return out


@njit(cache=True)
def _nb_band_norms(values, kind, d, m, offs, i0, i1, max_lag):
    n, D = values.shape
    out = np.full((i1 - i0, max_lag), np.nan)
    inv = np.empty(D)
    inc = np.empty(D)
    lg = np.empty(D)
    x = np.empty(D)
    xp = np.empty(D)
    tmp = np.empty(D)
    for i in range(i0, i1):
        _nb_inverse(values[i], inv, x, xp, tmp, d, m, offs)
        for lag in range(1, max_lag + 1):
            j = i + lag
            if j >= n:
                break
            _nb_mul(inv, values[j], inc, d, m, offs)
            out[i - i0, lag - 1] = _nb_norm_of(inc, kind, lg, x, xp, tmp, d, m, offs)
    return out


@njit(cache=True)
def _nb_pvar_dp(P):
    n = P.shape[0]
    best = np.zeros(n)
    for j in range(1, n):
        b = -1.0
        for i in range(j):
            v = best[i] + P[i, j]
            if v > b:
                b = v
        best[j] = b
    return best


@njit(cache=True)
def _nb_smallest_control(P):
    n = P.shape[0]
    table = np.zeros((n, n))
    best = np.zeros(n)
    for i in range(n):
        best[i] = 0.0
        for j in range(i + 1, n):
            b = -1.0
            for k in range(i, j):
                v = best[k] + P[k, j]
                if v > b:
                    b = v
            best[j] = b
            table[i, j] = b
    return table


@njit(cache=True)
def _nb_gap_dp(times, table, delta, slack):
    n = times.size
    best = np.full(n, -np.inf)
    best[0] = 0.0
    for j in range(1, n):
        b = -np.inf
        for i in range(j - 1, -1, -1):
            if times[j] - times[i] > delta + slack:
                break
            v = best[i] + table[i, j]
            if v > b:
                b = v
        best[j] = b
    return best[n - 1]


@njit(cache=True)
def _nb_chen_prefix(increments, d, m, offs):
    n = increments.shape[0]
    D = offs[m + 1]
    out = np.zeros((n + 1, D))
    s = np.zeros(D)
    comp = np.zeros(D)
    e = np.zeros(D)
    s[0] = 1.0
    out[0, 0] = 1.0
    for step in range(n):
        # segment exponential: level k = delta^{(x)k} / k!
        e[0] = 1.0
        for q in range(d):
            e[offs[1] + q] = increments[step, q]
        for k in range(2, m + 1):
            for p in range(offs[k] - offs[k - 1]):
                pv = e[offs[k - 1] + p] / k
                for q in range(d):
                    e[offs[k] + p * d + q] = pv * increments[step, q]
        # left-to-right product, top level first so lower levels are still old
        for k in range(m, 0, -1):
            nk = offs[k + 1] - offs[k]
            for idx in range(nk):
                incr = 0.0
                # sum_{i<k} s^i (x) e^{k-i}; index idx = p * d^(k-i) + q
                for i in range(k):
                    j = k - i
                    nj = offs[j + 1] - offs[j]
                    p = idx // nj
                    q = idx - p * nj
                    incr += s[offs[i] + p] * e[offs[j] + q]
                pos = offs[k] + idx
                y = incr - comp[pos]
                t = s[pos] + y
                comp[pos] = (t - s[pos]) - y
                s[pos] = t
        for idx in range(D):
            out[step + 1, idx] = s[idx]
    return out


# ---------------------------------------------------------------------------
# numpy implementations


def _np_norm_flat(g: np.ndarray, kind: int, d: int, m: int) -> np.ndarray:
    off = offsets(d, m)
    src = flat_log(g, d, m) if kind == LNORM else g
    best = np.zeros(g.shape[:-1])
    for k in range(1, m + 1):
        mx = np.abs(src[..., off[k]:off[k + 1]]).max(axis=-1)
        if kind == TNORM:
            mx = mx * factorial(k)
        if k == 1:
            root = mx
        elif k == 2:
            root = np.sqrt(mx)
        else:
            root = mx ** (1.0 / k)
        best = np.maximum(best, root)
    return best


def _np_pair_norms(values, kind, d, m):
    n = values.shape[0]
    out = np.zeros((n, n))
    for i in range(n - 1):
        inv = flat_inverse(values[i], d, m)
        inc = flat_mul(inv[None, :], values[i + 1:], d, m)
        out[i, i + 1:] = _np_norm_flat(inc, kind, d, m)
    return out


def _np_increments_from(values, i, d, m):
    inv = flat_inverse(values[i], d, m)
    return flat_mul(inv[None, :], values[i + 1:], d, m)


def _np_pair_dists(xv, yv, kind, right, d, m):
    n = xv.shape[0]
    out = np.zeros((n, n))
    for i in range(n - 1):
        xi = _np_increments_from(xv, i, d, m)
        yi = _np_increments_from(yv, i, d, m)
        if right:
            w = flat_mul(xi, flat_inverse(yi, d, m), d, m)
        else:
            w = flat_mul(flat_inverse(xi, d, m), yi, d, m)
        out[i, i + 1:] = _np_norm_flat(w, kind, d, m)
    return out


def _np_band_norms(values, kind, d, m, i0, i1, max_lag):
    n = values.shape[0]
    out = np.full((i1 - i0, max_lag), np.nan)
    for lag in range(1, max_lag + 1):
        lo, hi = i0, min(i1, n - lag)
        if hi <= lo:
            break
        inc = flat_mul(flat_inverse(values[lo:hi], d, m), values[lo + lag:hi + lag], d, m)
        out[0:hi - lo, lag - 1] = _np_norm_flat(inc, kind, d, m)
    return out


def _np_pvar_dp(P):
    n = P.shape[0]
    best = np.zeros(n)
    for j in range(1, n):
        best[j] = np.max(best[:j] + P[:j, j])
    return best


def _np_smallest_control(P):
    n = P.shape[0]
    table = np.zeros((n, n))
    for i in range(n):
        best = np.zeros(n - i)
        for jj in range(1, n - i):
            j = i + jj
            best[jj] = np.max(best[:jj] + P[i:j, j])
        table[i, i:] = best
    return table


def _np_gap_dp(times, table, delta, slack):
    n = times.size
    best = np.full(n, -np.inf)
    best[0] = 0.0
    for j in range(1, n):
        lo = np.searchsorted(times, times[j] - delta - slack, side="left")
        if lo < j:
            best[j] = np.max(best[lo:j] + table[lo:j, j])
    return best[n - 1]


def _np_chen_prefix(increments, d, m):
    off = offsets(d, m)
    n = increments.shape[0]
    D = off[-1]
    out = np.zeros((n + 1, D))
    s = np.zeros(D)
    s[0] = 1.0
    comp = np.zeros(D)
    out[0] = s
    for step in range(n):
        delta = increments[step]
        e = [np.ones(1)]
        for k in range(1, m + 1):
            e.append(np.multiply.outer(e[-1] / k, delta).reshape(-1))
        for k in range(m, 0, -1):
            incr = np.zeros(d**k)
            for i in range(k):
                incr += np.multiply.outer(s[off[i]:off[i + 1]], e[k - i]).reshape(-1)
            sl = slice(off[k], off[k + 1])
            y = incr - comp[sl]
            t = s[sl] + y
            comp[sl] = (t - s[sl]) - y
            s[sl] = t
        out[step + 1] = s
    return out


# ---------------------------------------------------------------------------
# dispatch


def _numba_on() -> bool:
    return HAVE_NUMBA and _config.USE_NUMBA


def pair_norms(values: np.ndarray, kind: int, d: int, m: int) -> np.ndarray:
    """Upper-triangular matrix of ||Y_i^{-1} Y_j|| for i < j."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    if _numba_on():
        return _nb_pair_norms(values, int(kind), d, m, _offs(d, m))
    return _np_pair_norms(values, kind, d, m)


def pair_dists(xv: np.ndarray, yv: np.ndarray, kind: int, right: bool, d: int, m: int) -> np.ndarray:
    """Upper-triangular matrix of dist(X_ij, Y_ij) for i < j."""
    xv = np.ascontiguousarray(xv, dtype=np.float64)
    yv = np.ascontiguousarray(yv, dtype=np.float64)
    if _numba_on():
        return _nb_pair_dists(xv, yv, int(kind), bool(right), d, m, _offs(d, m))
    return _np_pair_dists(xv, yv, kind, right, d, m)


def band_norms(values: np.ndarray, kind: int, d: int, m: int, i0: int, i1: int, max_lag: int):
    """Rows i0..i1-1 of ||Y_i^{-1} Y_{i+lag}||, lag = 1..max_lag (nan past the end)."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    if _numba_on():
        return _nb_band_norms(values, int(kind), d, m, _offs(d, m), i0, i1, max_lag)
    return _np_band_norms(values, kind, d, m, i0, i1, max_lag)


def pvar_dp(P: np.ndarray) -> np.ndarray:
    """best[j] = max over grid subdivisions of [t_0, t_j] of the summed weights P[i, k]."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    if _numba_on():
        return _nb_pvar_dp(P)
    return _np_pvar_dp(P)


def smallest_control(P: np.ndarray) -> np.ndarray:
    P = np.ascontiguousarray(P, dtype=np.float64)
    if _numba_on():
        return _nb_smallest_control(P)
    return _np_smallest_control(P)


def gap_dp(times: np.ndarray, table: np.ndarray, delta: float, slack: float) -> float:
    times = np.ascontiguousarray(times, dtype=np.float64)
    table = np.ascontiguousarray(table, dtype=np.float64)
    if _numba_on():
        return float(_nb_gap_dp(times, table, float(delta), float(slack)))
    return float(_np_gap_dp(times, table, float(delta), float(slack)))


def chen_prefix(increments: np.ndarray, m: int) -> np.ndarray:
    """Running signatures S_{0,t_k}, k = 0..n, of a piecewise-linear path."""
    increments = np.ascontiguousarray(np.atleast_2d(increments), dtype=np.float64)
    d = increments.shape[1]
    if _numba_on():
        return _nb_chen_prefix(increments, d, m, _offs(d, m))
    return _np_chen_prefix(increments, d, m)
