"""Constructive Chow: explicit piecewise-linear paths with a prescribed signature.

The target is corrected degree by degree.  At degree k the residual's log
level is written in the Lyndon bracket basis, and each basis bracket with
coefficient c contributes a group-commutator loop of axis segments of side
|c|^(1/k).  Such a loop's log starts at degree k with exactly that bracket,
so pass k clears level k and only pushes error into higher levels.  Negative
coefficients swap the outermost commutator, which reverses the orientation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import exp as _mexp

import numpy as np
from scipy.integrate import quad

from . import _kernels
from .controls import Control, TableControl
from .errors import InvalidInput, Unsupported
from .lyndon import bracket_tree, lyndon_coordinates, lyndon_words
from .paths import PiecewisePath, SampledGroupPath
from .tensor import GroupElement, TruncatedTensor, flat_inverse, flat_log, flat_mul, offsets

MAX_REALIZE_STEP = 3

# Length <= C * lnorm(target) for every realization, per (d, m).  For m = 2
# the construction gives C = sqrt(d) + 2 d (d - 1) exactly; the m = 3 values
# come from benchmarks/calibrate_realizer.py (searched worst ratio 25.18 and
# 87.23 with the chord split around the loops; margin >= 1.34).
REALIZATION_CONSTANTS = {
    (1, 1): 1.0,
    (2, 1): 2.0**0.5,
    (3, 1): 3.0**0.5,
    (2, 2): 2.0**0.5 + 4.0,
    (3, 2): 3.0**0.5 + 12.0,
    (2, 3): 35.4,
    (3, 3): 117.1,
}

# coefficients below this fraction of lnorm^k are roundoff and get no loop
_DROP = 1e-13


def realization_constant(d: int, m: int) -> float:
    c = REALIZATION_CONSTANTS.get((d, m))
    if c is None:
        raise Unsupported(f"no calibrated realization constant for d={d}, m={m}")
    return c


def _loop(tree, s: float, d: int) -> list[np.ndarray]:
    if isinstance(tree, int):
        v = np.zeros(d)
        v[tree] = s
        return [v]
    a = _loop(tree[0], s, d)
    b = _loop(tree[1], s, d)
    return a + b + [-x for x in reversed(a)] + [-x for x in reversed(b)]


def bracket_loop(word: tuple[int, ...], coeff: float, d: int) -> np.ndarray:
    """Increments of a loop whose log is coeff * b(word) plus higher degrees."""
    k = len(word)
    tree = bracket_tree(word)
    if coeff < 0:
        tree = (tree[1], tree[0])
    return np.array(_loop(tree, abs(coeff) ** (1.0 / k), d))


def _level_coords(ell: np.ndarray, d: int, m: int, k: int) -> np.ndarray:
    off = offsets(d, m)
    lk = ell[off[k]:off[k + 1]]
    if k == 2:
        # exact Lyndon coordinates of a degree-2 Lie element: c_ij = (l_ij - l_ji) / 2, i < j
        A = lk.reshape(d, d)
        iu = np.triu_indices(d, 1)
        return 0.5 * (A[iu] - A.T[iu])
    return lyndon_coordinates(lk, d, k)


def _coef_residual(achieved: np.ndarray, target: np.ndarray, d: int, m: int) -> float:
    ell = flat_log(flat_mul(flat_inverse(achieved, d, m), target, d, m), d, m)
    return float(np.abs(ell[1:]).max()) if ell.size > 1 else 0.0


@dataclass(frozen=True)
class Realization:
    path: PiecewisePath
    target: GroupElement
    achieved: GroupElement
    length: float
    residual: float
    residual_homogeneous: float
    increments: np.ndarray = field(repr=False)

    @property
    def speed_ratio(self) -> float:
        """Constant speed over [0, 1] divided by lnorm(target)."""
        from .metrics import lnorm

        n = lnorm(self.target)
        return self.length / n if n > 0 else 0.0


def realize_increments(g: GroupElement) -> np.ndarray:
    """Segment increments (k, d) of the constructive realization of g.

    The chord is split in half around the bracket loops, so the path reads
    chord/2, loops of degree 2, loops of degree 3, chord/2.  The symmetric
    split kills the [chord, area] term that a leading chord would leave at
    degree 3.  Without loops the chord stays one segment.
    """
    d, m = g.d, g.m
    if m > MAX_REALIZE_STEP:
        raise Unsupported(f"constructive realization supports m <= {MAX_REALIZE_STEP}, got m={m}")
    from .metrics import lnorm

    scale = lnorm(g)
    target = g.data
    off = offsets(d, m)
    delta = target[off[1]:off[2]].copy()
    half = 0.5 * delta
    has_chord = bool(np.any(delta != 0.0))
    head = [half] if has_chord else []
    tail_inv = _kernels.chen_prefix(-half[None, :], m)[-1]
    loops: list[np.ndarray] = []
    for k in range(2, m + 1):
        # what is still owed between the head (chord/2 and loops so far) and the tail chord/2
        prefix = _kernels.chen_prefix(np.array(head + loops).reshape(-1, d), m)[-1]
        r = flat_mul(flat_mul(flat_inverse(prefix, d, m), target, d, m), tail_inv, d, m)
        ell = flat_log(r, d, m)
        coords = _level_coords(ell, d, m, k)
        cut = _DROP * scale**k
        for w, c in zip(lyndon_words(d, k), coords):
            if abs(c) > cut:
                loops.extend(bracket_loop(w, float(c), d))
    if not loops:
        return delta[None, :] if has_chord else np.zeros((0, d))
    inc = np.array(head + loops + ([half] if has_chord else []))
    lens = np.linalg.norm(inc, axis=1)
    return inc[lens > 1e-14 * lens.sum()]


def unit_speed_path(inc: np.ndarray, d: int) -> PiecewisePath:
    """Vertices at cumulative-length times over [0, 1]; a constant path when inc is empty."""
    if inc.shape[0] == 0:
        return PiecewisePath([0.0, 1.0], np.zeros((2, d)))
    lens = np.linalg.norm(inc, axis=1)
    times = np.concatenate([[0.0], np.cumsum(lens) / lens.sum()])
    times[-1] = 1.0
    pts = np.concatenate([np.zeros((1, d)), np.cumsum(inc, axis=0)])
    return PiecewisePath(times, pts)


def realize(g: TruncatedTensor) -> Realization:
    """Piecewise-linear unit-speed path over [0, 1] whose m-signature is g."""
    if not isinstance(g, GroupElement):
        g = GroupElement.from_tensor(g)
    d, m = g.d, g.m
    inc = realize_increments(g)
    achieved = _kernels.chen_prefix(inc, m)[-1] if inc.shape[0] else GroupElement.identity(d, m).data
    ach = GroupElement._trusted(d, m, achieved)
    from .metrics import dist

    return Realization(
        path=unit_speed_path(inc, d),
        target=g,
        achieved=ach,
        length=float(np.linalg.norm(inc, axis=1).sum()),
        residual=_coef_residual(achieved, g.data, d, m),
        residual_homogeneous=dist(g, ach, "left", "l"),
        increments=inc,
    )


def realize_m2_batch(values: np.ndarray, d: int) -> np.ndarray:
    """Vectorized m = 2 realization of many elements (N, D) -> increments (N, 2 + 4P, d).

    Each row is chord/2, one square loop per pair i < j in lexicographic
    order, then chord/2; zero-length segments are kept so all rows align.
    """
    values = np.asarray(values, dtype=np.float64)
    off = offsets(d, 2)
    ell = flat_log(values, d, 2)
    delta = values[:, off[1]:off[2]]
    A = ell[:, off[2]:off[3]].reshape(-1, d, d)
    iu = np.triu_indices(d, 1)
    c = 0.5 * (A[:, iu[0], iu[1]] - A[:, iu[1], iu[0]])
    N, P = c.shape
    out = np.zeros((N, 2 + 4 * P, d))
    out[:, 0] = 0.5 * delta
    out[:, -1] = 0.5 * delta
    s = np.sqrt(np.abs(c))
    pos = c >= 0
    for q, (i, j) in enumerate(zip(*iu)):
        first = np.where(pos[:, q], i, j)
        second = np.where(pos[:, q], j, i)
        rows = np.arange(N)
        base = 1 + 4 * q
        out[rows, base, first] = s[:, q]
        out[rows, base + 1, second] = s[:, q]
        out[rows, base + 2, first] = -s[:, q]
        out[rows, base + 3, second] = -s[:, q]
    return out


# -- grid interpolant ------------------------------------------------------------


def subdivision_indices(Y: SampledGroupPath, D) -> np.ndarray:
    """Grid indices of the times in D; D must be a subset of Y's grid containing 0 and 1."""
    D = np.unique(np.asarray(D, dtype=np.float64))
    idx = np.searchsorted(Y.times, D)
    idx = np.clip(idx, 0, len(Y) - 1)
    # accept a neighbour within rounding
    lo = np.clip(idx - 1, 0, len(Y) - 1)
    idx = np.where(np.abs(Y.times[lo] - D) < np.abs(Y.times[idx] - D), lo, idx)
    if np.any(np.abs(Y.times[idx] - D) > 1e-12):
        raise InvalidInput("subdivision D must be drawn from the sample grid")
    if idx[0] != 0 or idx[-1] != len(Y) - 1:
        raise InvalidInput("subdivision D must contain 0 and 1")
    return idx


def mesh_subdivision(times, k: int) -> np.ndarray:
    """Grid times nearest to the uniform mesh 2^-k (deduplicated, always with 0 and 1)."""
    times = np.asarray(times, dtype=np.float64)
    if k < 0:
        raise InvalidInput("mesh exponent must be non-negative")
    targets = np.linspace(0.0, 1.0, 2**k + 1)
    idx = np.abs(times[None, :] - targets[:, None]).argmin(axis=1)
    idx = np.unique(np.concatenate([[0], idx, [times.size - 1]]))
    return times[idx]


def interpolant(Y: SampledGroupPath, D) -> PiecewisePath:
    """y(D): realizations of the D-increments of Y, each rescaled into its D-interval."""
    if Y.m > MAX_REALIZE_STEP:
        raise Unsupported(f"interpolant needs m <= {MAX_REALIZE_STEP}")
    idx = subdivision_indices(Y, D)
    d = Y.d
    times = [np.zeros(1)]
    incs = []
    for a, b in zip(idx[:-1], idx[1:]):
        ta, tb = Y.times[a], Y.times[b]
        inc = realize_increments(Y.increment(a, b))
        if inc.shape[0] == 0:
            inc = np.zeros((1, d))
            tau = np.ones(1)
        else:
            lens = np.linalg.norm(inc, axis=1)
            tau = np.cumsum(lens) / lens.sum()
        loc = ta + (tb - ta) * tau
        loc[-1] = tb
        times.append(loc)
        incs.append(inc)
    ts = np.concatenate(times)
    pts = np.concatenate([np.zeros((1, d)), np.cumsum(np.concatenate(incs), axis=0)])
    return PiecewisePath(ts, pts)


# -- the control omega_D -------------------------------------------------------


class OmegaDControl(Control):
    """omega_D built from a subdivision and the smallest control on its nodes.

    Inside a D-interval it is ((t-s)/h)^p delta(t_i, t_{i+1}).  When [s, t]
    contains nodes, t_i is the first node >= s and t_j the last node <= t,
    and omega_D(s, t) = omega_D(s, t_i) + delta(t_i, t_j) + omega_D(t_j, t).
    Taking t_i = s at a node gives omega_D = delta on pairs of nodes, so
    omega_D(0, 1) = delta(0, 1).
    """

    kind = "omegaD"

    def __init__(self, nodes, node_delta, p: float):
        self.nodes = np.asarray(nodes, dtype=np.float64)
        self.node_delta = np.asarray(node_delta, dtype=np.float64)
        self.p = float(p)

    def _within(self, s, t, i):
        i = np.clip(i, 0, self.nodes.size - 2)
        h = self.nodes[i + 1] - self.nodes[i]
        return (np.clip(t - s, 0.0, None) / h) ** self.p * self.node_delta[i, i + 1]

    def __call__(self, s, t):
        s = np.asarray(s, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        s, t = np.broadcast_arrays(s, t)
        last = self.nodes.size - 1
        i = np.clip(np.searchsorted(self.nodes, s, side="left"), 0, last)  # first node >= s
        j = np.clip(np.searchsorted(self.nodes, t, side="right") - 1, 0, last)  # last node <= t
        spans = i <= j
        inside = self._within(s, t, i - 1)
        left = self._within(s, self.nodes[i], i - 1)
        mid = self.node_delta[i, np.maximum(i, j)]
        right = self._within(self.nodes[j], t, j)
        out = np.where(spans, left + mid + right, inside)
        out = np.where(t > s, out, 0.0)
        return out if out.ndim else float(out)

    def describe(self):
        return f"omegaD(p={self.p:g}, |D|={self.nodes.size})"


def omega_d_control(D, delta_table: TableControl, p: float) -> OmegaDControl:
    """omega_D for subdivision D (a subset of the table's grid)."""
    if p < 1:
        raise InvalidInput(f"omega_D needs p >= 1, got {p}")
    grid = delta_table.grid
    fake = SampledGroupPath.identity_path(grid, 1, 1)
    idx = subdivision_indices(fake, D)
    return OmegaDControl(grid[idx], delta_table.values[np.ix_(idx, idx)], p)


# -- smooth time warp ----------------------------------------------------------


def _bump(v: float) -> float:
    if v <= 0.0 or v >= 1.0:
        return 0.0
    return _mexp(-1.0 / (v * (1.0 - v)))


@lru_cache(maxsize=1)
def _bump_mass() -> float:
    return quad(_bump, 0.0, 1.0, epsabs=0, epsrel=1e-13, limit=200)[0]


def phi(u):
    """Smooth non-decreasing warp of [0, 1]; every derivative vanishes at both ends."""
    u = np.asarray(u, dtype=np.float64)
    z = _bump_mass()
    flat = np.clip(u.ravel(), 0.0, 1.0)
    vals = np.empty_like(flat)
    for n, x in enumerate(flat):
        # integrate from the nearer end so phi(1 - u) = 1 - phi(u) holds to roundoff
        if x <= 0.5:
            vals[n] = quad(_bump, 0.0, x, epsabs=0, epsrel=1e-13, limit=200)[0] / z
        else:
            vals[n] = 1.0 - quad(_bump, x, 1.0, epsabs=0, epsrel=1e-13, limit=200)[0] / z
    out = vals.reshape(u.shape)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class TimeWarp:
    """Per-segment smooth reparametrization of a piecewise-linear path."""

    knots: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        k = np.clip(np.searchsorted(self.knots, t, side="right") - 1, 0, self.knots.size - 2)
        t0, t1 = self.knots[k], self.knots[k + 1]
        u = np.clip((t - t0) / (t1 - t0), 0.0, 1.0)
        out = t0 + (t1 - t0) * phi(u)
        return np.where(t >= self.knots[-1], np.minimum(t, self.knots[-1]), out)

    def points(self, x: PiecewisePath, t) -> np.ndarray:
        """x evaluated at warped times."""
        return x.points_at(self(t))


def smooth_reparam(x: PiecewisePath) -> TimeWarp:
    if len(x) < 2:
        return TimeWarp(np.array([0.0, 1.0]))
    return TimeWarp(np.asarray(x.times, dtype=np.float64).copy())


# -- diagnostics ---------------------------------------------------------------


def _pair_residuals(A: np.ndarray, B: np.ndarray, d: int, m: int) -> tuple[float, float]:
    """Max over i < j of the log-coefficient and lnorm gaps between A_{ij} and B_{ij}."""
    off = offsets(d, m)
    coef = 0.0
    homog = 0.0
    for i in range(A.shape[0] - 1):
        xa = flat_mul(flat_inverse(A[i], d, m)[None], A[i + 1:], d, m)
        xb = flat_mul(flat_inverse(B[i], d, m)[None], B[i + 1:], d, m)
        ell = flat_log(flat_mul(flat_inverse(xa, d, m), xb, d, m), d, m)
        coef = max(coef, float(np.abs(ell[:, 1:]).max()))
        for k in range(1, m + 1):
            lv = np.abs(ell[:, off[k]:off[k + 1]]).max()
            homog = max(homog, float(lv) ** (1.0 / k))
    return coef, homog


def interpolant_report(Y: SampledGroupPath, D, p: float = 2.1, y: PiecewisePath | None = None) -> dict:
    """Grid matching on D-pairs and the p-variation ratio on Y's grid for y(D)."""
    from .metrics import pvar_norm, sup_distances
    from .signature import lift

    if y is None:
        y = interpolant(Y, D)
    idx = subdivision_indices(Y, D)
    Z = lift(y, Y.m, times=Y.times)
    coef, homog = _pair_residuals(Z.values[idx], Y.values[idx], Y.d, Y.m)
    ny = pvar_norm(Y, p)
    _, d_tilde = sup_distances(Z, Y)
    return {
        "length": y.length(),
        "n_intervals": int(idx.size - 1),
        "grid_residual": coef,
        "grid_residual_homogeneous": homog,
        "pvar_p": float(p),
        "pvar_ratio": pvar_norm(Z, p) / ny if ny > 0 else 0.0,
        "d_tilde_inf": d_tilde,
    }
