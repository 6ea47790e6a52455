"""File formats: path CSV, group-path JSON, tensor JSON, plus loader helpers.

Floats are written with repr (shortest round-trip form) in JSON and with
17 significant digits in CSV, so every file re-reads to identical values.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidInput
from .paths import PiecewisePath, SampledGroupPath
from .tensor import GroupElement, TruncatedTensor


def read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror or exc}") from None


def read_json(path):
    try:
        return json.loads(read_text(path))
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path} is not valid JSON: {exc}") from None


def load_piecewise(path) -> PiecewisePath:
    return PiecewisePath.from_csv(read_text(path))


def load_tensor(path) -> TruncatedTensor:
    obj = read_json(path)
    return TruncatedTensor.from_json_obj(obj)


def load_group(path) -> GroupElement:
    return GroupElement.from_tensor(load_tensor(path))


def load_sampled(path, m: int = 2) -> SampledGroupPath:
    """A group path from JSON, or the step-m lift of a CSV path at its vertices."""
    from .signature import lift

    p = str(path)
    if p.endswith(".csv"):
        return lift(load_piecewise(path), m)
    obj = read_json(path)
    if isinstance(obj, dict) and "times" in obj:
        return SampledGroupPath.from_json_obj(obj)
    raise InvalidInput(f"{path}: expected a path CSV or a group-path JSON with 'times'")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_default)


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "to_json_obj"):
        return o.to_json_obj()
    raise TypeError(f"cannot serialize {type(o).__name__}")
