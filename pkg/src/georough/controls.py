"""Controls: continuous superadditive functions on the simplex {s <= t}.

Controls are callables ``omega(s, t)`` broadcasting over numpy arrays.
Controls given as strings on the command line follow

    ts^q                        (t - s)**q
    table:<file>                tabulated values on a grid (JSON), bilinear
    omegaD:<file>,p=<p>,mesh=<k>   composite control of a grid interpolant
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import InvalidInput


class Control:
    kind = "abstract"

    def __call__(self, s, t):
        raise NotImplementedError

    def describe(self) -> str:
        return self.kind


class PowerControl(Control):
    """omega(s, t) = scale * (t - s)**exponent."""

    kind = "power"

    def __init__(self, exponent: float = 1.0, scale: float = 1.0):
        if exponent <= 0 or scale <= 0:
            raise InvalidInput("power control needs positive exponent and scale")
        self.exponent = float(exponent)
        self.scale = float(scale)

    def __call__(self, s, t):
        s = np.asarray(s, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        return self.scale * np.clip(t - s, 0.0, None) ** self.exponent

    def describe(self):
        return f"ts^{self.exponent:g}" if self.scale == 1.0 else f"{self.scale:g}*ts^{self.exponent:g}"


class TableControl(Control):
    """Control tabulated on a grid, omega(grid[i], grid[j]) = values[i, j]; bilinear between nodes.

    Only the upper triangle (i <= j) is used; the lower triangle is zeroed
    and queries with s >= t return 0.
    """

    kind = "table"

    def __init__(self, grid, values):
        grid = np.asarray(grid, dtype=np.float64)
        values = np.array(values, dtype=np.float64)
        if values.shape != (grid.size, grid.size):
            raise InvalidInput(f"table values must be {grid.size}x{grid.size}")
        if np.any(np.diff(grid) <= 0):
            raise InvalidInput("table grid must be strictly increasing")
        full = np.triu(values)
        self.grid = grid
        self.values = full
        self._interp = RegularGridInterpolator((grid, grid), full, method="linear", bounds_error=False, fill_value=None)

    def __call__(self, s, t):
        s = np.asarray(s, dtype=np.float64)
        t = np.asarray(t, dtype=np.float64)
        s_b, t_b = np.broadcast_arrays(s, t)
        pts = np.stack([s_b.ravel(), t_b.ravel()], axis=-1)
        out = self._interp(pts).reshape(s_b.shape)
        out = np.where(t_b > s_b, out, 0.0)
        return out if out.ndim else float(out)

    def at_nodes(self, i, j):
        return self.values[i, j]

    def to_json_obj(self) -> dict:
        return {"grid": self.grid.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_json_obj(cls, obj) -> "TableControl":
        try:
            return cls(obj["grid"], obj["values"])
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed control table: {exc}") from None


def parse_control(spec: str, loader=None) -> Control:
    """Build a control from its spec string.

    ``loader(path, p, mesh)`` builds the omegaD control; the CLI passes one
    so this module stays free of realizer imports.
    """
    spec = spec.strip()
    if spec.startswith("ts^"):
        try:
            q = float(spec[3:])
        except ValueError:
            raise InvalidInput(f"bad exponent in control spec {spec!r}") from None
        return PowerControl(q)
    if spec == "ts":
        return PowerControl(1.0)
    if spec.startswith("table:"):
        path = Path(spec[len("table:"):])
        try:
            obj = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInput(f"cannot read control table {path}: {exc}") from None
        return TableControl.from_json_obj(obj)
    if spec.startswith("omegaD:"):
        body = spec[len("omegaD:"):]
        parts = body.split(",")
        params = {}
        for kv in parts[1:]:
            if "=" not in kv:
                raise InvalidInput(f"bad omegaD parameter {kv!r}")
            k, v = kv.split("=", 1)
            params[k.strip()] = v.strip()
        if loader is None:
            raise InvalidInput("omegaD controls need a path loader")
        try:
            p = float(params.get("p", "2"))
            mesh = int(params.get("mesh", "3"))
        except ValueError:
            raise InvalidInput(f"bad omegaD parameters in {spec!r}") from None
        return loader(parts[0], p, mesh)
    raise InvalidInput(f"unknown control spec {spec!r} (expected ts^q, table:<file> or omegaD:<params>)")
