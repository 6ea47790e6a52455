"""Path containers: piecewise-linear R^d paths and sampled group-valued paths."""
from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Sequence

import numpy as np

from . import _config
from .errors import InvalidInput, NotGroupLike
from .tensor import (
    GroupElement,
    check_shape,
    flat_dynkin_residual,
    flat_inverse,
    flat_log,
    flat_mul,
    offsets,
    tensor_size,
)

_TIME_EPS = 1e-12


class PiecewisePath:
    """Timestamped vertices in R^d, joined by straight segments.

    Times are strictly increasing and start at 0.  The path is constant
    after its last vertex.
    """

    def __init__(self, times: Iterable[float], points):
        times = np.array(times, dtype=np.float64).reshape(-1)
        points = np.array(points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        if times.size < 1:
            raise InvalidInput("a path needs at least one vertex")
        if points.shape[0] != times.size:
            raise InvalidInput(f"{times.size} times but {points.shape[0]} points")
        if times[0] != 0.0:
            raise InvalidInput(f"first time must be 0, got {times[0]!r}")
        if np.any(np.diff(times) <= 0):
            raise InvalidInput("times must be strictly increasing")
        if times[-1] > 1.0 + _TIME_EPS:
            raise InvalidInput(f"times must lie in [0, 1], got last time {times[-1]!r}")
        times.setflags(write=False)
        points.setflags(write=False)
        self.times = times
        self.points = points

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.times.size

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.points, axis=0)

    def point_at(self, t: float) -> np.ndarray:
        t = float(t)
        if t <= 0.0:
            return self.points[0].copy()
        if t >= self.times[-1]:
            return self.points[-1].copy()
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        t0, t1 = self.times[k], self.times[k + 1]
        w = (t - t0) / (t1 - t0)
        return self.points[k] + w * (self.points[k + 1] - self.points[k])

    def points_at(self, ts: Iterable[float]) -> np.ndarray:
        ts = np.asarray(ts, dtype=np.float64)
        return np.stack([np.interp(ts, self.times, self.points[:, j]) for j in range(self.dim)], axis=-1)

    def pieces(self, s: float, t: float) -> np.ndarray:
        """Segment increments over [s, t], splitting end segments exactly."""
        if s > t:
            raise InvalidInput(f"need s <= t, got s={s}, t={t}")
        if s == t:
            return np.zeros((0, self.dim))
        inner = self.times[(self.times > s) & (self.times < t)]
        knots = np.concatenate([[s], inner, [t]])
        pts = np.stack([self.point_at(u) for u in knots])
        return np.diff(pts, axis=0)

    def length(self, s: float = 0.0, t: float = 1.0) -> float:
        return float(np.linalg.norm(self.pieces(s, t), axis=1).sum())

    def refine(self, extra_times: Iterable[float]) -> "PiecewisePath":
        """Insert (collinear) vertices at the given times."""
        extra = np.asarray(list(extra_times), dtype=np.float64)
        ts = np.union1d(self.times, extra[(extra > 0) & (extra <= 1)])
        return PiecewisePath(ts, self.points_at(ts))

    def reversed(self) -> "PiecewisePath":
        """The same trace run backwards over the same time span."""
        T = self.times[-1]
        return PiecewisePath(T - self.times[::-1], self.points[::-1])

    # -- CSV ---------------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        header = ["t"] + [f"x{j + 1}" for j in range(self.dim)]
        buf.write(",".join(header) + "\n")
        for t, p in zip(self.times, self.points):
            buf.write(",".join(f"{v:.17g}" for v in (t, *p)) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PiecewisePath":
        rows = list(csv.reader(io.StringIO(text)))
        rows = [r for r in rows if r and any(c.strip() for c in r)]
        if not rows:
            raise InvalidInput("empty path CSV")
        header = [c.strip() for c in rows[0]]
        if header[0] != "t" or any(h != f"x{j + 1}" for j, h in enumerate(header[1:])):
            raise InvalidInput(f"path CSV header must be t,x1,...,xd; got {','.join(header)}")
        try:
            data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=np.float64)
        except ValueError as exc:
            raise InvalidInput(f"non-numeric entry in path CSV: {exc}") from None
        if data.ndim != 2 or data.shape[1] != len(header):
            raise InvalidInput("ragged rows in path CSV")
        return cls(data[:, 0], data[:, 1:])


class SampledGroupPath:
    """Group-valued path known at times 0 = t_0 < ... < t_n = 1.

    ``values`` is an (n+1, D) array of flat group elements; the first is the
    identity.  Increments are Y_{s,t} = Y_s^{-1} Y_t.
    """

    def __init__(self, times, values, d: int, m: int, check: bool = True, tol: float | None = None):
        check_shape(d, m)
        times = np.array(times, dtype=np.float64).reshape(-1)
        values = np.array(values, dtype=np.float64)
        if values.ndim != 2 or values.shape != (times.size, tensor_size(d, m)):
            raise InvalidInput(
                f"values must have shape ({times.size}, {tensor_size(d, m)}), got {values.shape}"
            )
        if times.size < 2:
            raise InvalidInput("a sampled path needs at least two times")
        if times[0] != 0.0 or abs(times[-1] - 1.0) > _TIME_EPS:
            raise InvalidInput("sample times must run from 0 to 1")
        if np.any(np.diff(times) <= 0):
            raise InvalidInput("sample times must be strictly increasing")
        if check:
            ident = np.zeros(values.shape[1])
            ident[0] = 1.0
            if np.max(np.abs(values[0] - ident)) > _config.ARITH_TOL:
                raise InvalidInput("a sampled group path must start at the identity")
            if np.any(values[:, 0] != 1.0):
                raise InvalidInput("every sample needs level 0 equal to 1")
            tol = _config.CERT_TOL if tol is None else tol
            res = flat_dynkin_residual(flat_log(values, d, m), d, m)
            worst = float(res.max())
            if worst > tol:
                raise NotGroupLike(f"sample {int(res.argmax())} fails group check (residual {worst:.2e})")
        times.setflags(write=False)
        values.setflags(write=False)
        self.times = times
        self.values = values
        self.d = d
        self.m = m

    def __len__(self) -> int:
        return self.times.size

    def value(self, i: int) -> GroupElement:
        return GroupElement._trusted(self.d, self.m, self.values[i])

    def increment(self, i: int, j: int) -> GroupElement:
        inv = flat_inverse(self.values[i], self.d, self.m)
        return GroupElement._trusted(self.d, self.m, flat_mul(inv, self.values[j], self.d, self.m))

    def restrict_times(self, idx: Sequence[int]) -> "SampledGroupPath":
        idx = np.asarray(idx)
        return SampledGroupPath(self.times[idx], self.values[idx], self.d, self.m, check=False)

    def same_grid(self, other: "SampledGroupPath") -> bool:
        return (
            (self.d, self.m) == (other.d, other.m)
            and self.times.shape == other.times.shape
            and np.allclose(self.times, other.times, rtol=0, atol=_TIME_EPS)
        )

    @classmethod
    def identity_path(cls, times, d: int, m: int) -> "SampledGroupPath":
        times = np.asarray(times, dtype=np.float64)
        vals = np.zeros((times.size, tensor_size(d, m)))
        vals[:, 0] = 1.0
        return cls(times, vals, d, m, check=False)

    # -- JSON --------------------------------------------------------------
    def to_json_obj(self) -> dict:
        off = offsets(self.d, self.m)
        return {
            "d": self.d,
            "m": self.m,
            "times": self.times.tolist(),
            "values": [
                [row[off[k]:off[k + 1]].tolist() for k in range(self.m + 1)] for row in self.values
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SampledGroupPath":
        try:
            d, m = int(obj["d"]), int(obj["m"])
            rows = [np.concatenate([np.asarray(lv, dtype=np.float64).reshape(-1) for lv in v]) for v in obj["values"]]
            return cls(obj["times"], np.array(rows), d, m)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInput):
                raise
            raise InvalidInput(f"malformed group-path JSON: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "SampledGroupPath":
        return cls.from_json_obj(json.loads(text))
