"""Truncated tensor algebra over R^d and the free nilpotent group inside it.

Elements are stored as one flat float64 vector holding the levels
0..m back to back; level k occupies ``d**k`` slots with multi-indices in
lexicographic (row-major) order.  The low-level ``flat_*`` functions act on
arrays of shape ``(..., D)`` so the same code serves single elements and
batches; the classes below wrap a single element.
"""
from __future__ import annotations

import json
from functools import lru_cache
from math import factorial
from typing import Iterable, Sequence

import numpy as np

from . import _config
from .errors import InvalidInput, NotGroupLike


# ---------------------------------------------------------------------------
# layout helpers


@lru_cache(maxsize=None)
def offsets(d: int, m: int) -> tuple[int, ...]:
    """Start index of each level, plus the total size as last entry."""
    out = [0]
    for k in range(m + 1):
        out.append(out[-1] + d**k)
    return tuple(out)


def tensor_size(d: int, m: int) -> int:
    return offsets(d, m)[-1]


def check_shape(d: int, m: int) -> None:
    if not (1 <= d <= _config.MAX_DIM):
        raise InvalidInput(f"dimension d={d} outside supported range 1..{_config.MAX_DIM}")
    if not (1 <= m <= _config.MAX_STEP):
        raise InvalidInput(f"step m={m} outside supported range 1..{_config.MAX_STEP}")


def level_view(x: np.ndarray, d: int, m: int, k: int) -> np.ndarray:
    off = offsets(d, m)
    return x[..., off[k]:off[k + 1]]


# ---------------------------------------------------------------------------
# batched flat arithmetic


def flat_mul(a: np.ndarray, b: np.ndarray, d: int, m: int) -> np.ndarray:
    """Truncated tensor product of (batches of) flat elements."""
    off = offsets(d, m)
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.zeros(shape, dtype=np.float64)
    for k in range(m + 1):
        acc = out[..., off[k]:off[k + 1]]
        for i in range(k + 1):
            j = k - i
            ai = a[..., off[i]:off[i + 1]]
            bj = b[..., off[j]:off[j + 1]]
            prod = ai[..., :, None] * bj[..., None, :]
            acc += prod.reshape(prod.shape[:-2] + (d**k,))
    return out


def _nilpotent_powers(x: np.ndarray, d: int, m: int) -> list[np.ndarray]:
    # x has zero level 0, so x^n vanishes beyond n = m
    powers = [x]
    for _ in range(1, m):
        powers.append(flat_mul(powers[-1], x, d, m))
    return powers


def flat_exp(x: np.ndarray, d: int, m: int) -> np.ndarray:
    out = np.zeros_like(x, dtype=np.float64)
    out[..., 0] = 1.0
    for n, xn in enumerate(_nilpotent_powers(x, d, m), start=1):
        out = out + xn / factorial(n)
    return out


def flat_log(g: np.ndarray, d: int, m: int) -> np.ndarray:
    x = np.array(g, dtype=np.float64, copy=True)
    x[..., 0] = 0.0
    out = np.zeros_like(x)
    for n, xn in enumerate(_nilpotent_powers(x, d, m), start=1):
        out = out + ((-1.0) ** (n + 1) / n) * xn
    return out


def flat_inverse(g: np.ndarray, d: int, m: int) -> np.ndarray:
    """Inverse of an element with unit level 0: sum of (1 - g)^n."""
    x = np.array(g, dtype=np.float64, copy=True)
    x[..., 0] = 0.0
    out = np.zeros_like(x)
    out[..., 0] = 1.0
    for n, xn in enumerate(_nilpotent_powers(x, d, m), start=1):
        out = out + ((-1.0) ** n) * xn
    return out


def flat_dilate(g: np.ndarray, t: float, d: int, m: int) -> np.ndarray:
    off = offsets(d, m)
    out = np.array(g, dtype=np.float64, copy=True)
    for k in range(1, m + 1):
        out[..., off[k]:off[k + 1]] *= float(t) ** k
    return out


def dynkin_level(lk: np.ndarray, d: int, k: int) -> np.ndarray:
    """Right-normed Dynkin map on a homogeneous level-k array (batched).

    D(e_{i1}...e_{ik}) = [...[[e_{i1}, e_{i2}], e_{i3}], ..., e_{ik}].
    """
    if k == 1:
        return np.array(lk, dtype=np.float64, copy=True)
    batch = lk.shape[:-1]
    cols = lk.reshape(batch + (d ** (k - 1), d))
    out = np.zeros(batch + (d**k,), dtype=np.float64)
    for a in range(d):
        inner = dynkin_level(cols[..., a], d, k - 1)
        left = np.zeros(batch + (d ** (k - 1), d))
        left[..., a] = inner
        right = np.zeros(batch + (d, d ** (k - 1)))
        right[..., a, :] = inner
        out += left.reshape(batch + (d**k,)) - right.reshape(batch + (d**k,))
    return out


def flat_dynkin_residual(ell: np.ndarray, d: int, m: int) -> np.ndarray:
    """max_k max|D(l^k) - k l^k| of a (batched) element with zero level 0."""
    off = offsets(d, m)
    res = np.zeros(ell.shape[:-1])
    for k in range(1, m + 1):
        lk = ell[..., off[k]:off[k + 1]]
        dev = np.abs(dynkin_level(lk, d, k) - k * lk)
        res = np.maximum(res, dev.max(axis=-1))
    return res


def flat_level_maxabs(x: np.ndarray, d: int, m: int) -> np.ndarray:
    """Max-abs coefficient per level 1..m, shape (..., m)."""
    off = offsets(d, m)
    return np.stack(
        [np.abs(x[..., off[k]:off[k + 1]]).max(axis=-1) for k in range(1, m + 1)],
        axis=-1,
    )


# ---------------------------------------------------------------------------
# element classes


class TruncatedTensor:
    """Immutable element of the truncated tensor algebra T^(m)(R^d).

    ``a * b`` is the tensor product when both sides are tensors and scalar
    multiplication otherwise; ``+``/``-`` are the vector-space operations.
    """

    __slots__ = ("d", "m", "data")

    def __init__(self, d: int, m: int, data: Iterable[float]):
        d, m = int(d), int(m)
        check_shape(d, m)
        arr = np.array(data, dtype=np.float64).reshape(-1)
        if arr.size != tensor_size(d, m):
            raise InvalidInput(
                f"flat data has {arr.size} entries, expected {tensor_size(d, m)} for d={d}, m={m}"
            )
        arr.setflags(write=False)
        self.d = d
        self.m = m
        self.data = arr

    # -- constructors ------------------------------------------------------
    @classmethod
    def from_levels(cls, levels: Sequence[Iterable[float]], d: int | None = None):
        m = len(levels) - 1
        if m < 1:
            raise InvalidInput("need at least levels 0 and 1")
        if d is None:
            d = np.asarray(levels[1], dtype=float).size
        parts = []
        for k, lv in enumerate(levels):
            arr = np.asarray(lv, dtype=np.float64).reshape(-1)
            if arr.size != d**k:
                raise InvalidInput(f"level {k} has {arr.size} coefficients, expected {d**k}")
            parts.append(arr)
        return cls(d, m, np.concatenate(parts))

    @classmethod
    def zero(cls, d: int, m: int):
        return cls(d, m, np.zeros(tensor_size(d, m)))

    @classmethod
    def one(cls, d: int, m: int):
        x = np.zeros(tensor_size(d, m))
        x[0] = 1.0
        return cls(d, m, x)

    @classmethod
    def from_vector(cls, v: Iterable[float], m: int, level0: float = 0.0):
        """Embed a vector of R^d at level 1."""
        v = np.asarray(v, dtype=np.float64).reshape(-1)
        d = v.size
        x = np.zeros(tensor_size(d, m))
        x[0] = level0
        x[1:1 + d] = v
        return cls(d, m, x)

    @classmethod
    def word(cls, d: int, m: int, letters: Sequence[int], coeff: float = 1.0):
        """coeff * e_{i1} ... e_{ik}, with 1-based letters."""
        k = len(letters)
        if k > m:
            return cls.zero(d, m)
        x = np.zeros(tensor_size(d, m))
        idx = 0
        for a in letters:
            if not 1 <= a <= d:
                raise InvalidInput(f"letter {a} outside 1..{d}")
            idx = idx * d + (a - 1)
        x[offsets(d, m)[k] + idx] = coeff
        return cls(d, m, x)

    # -- access ------------------------------------------------------------
    def level(self, k: int) -> np.ndarray:
        """Level-k coefficients as an array of shape (d,)*k."""
        if not 0 <= k <= self.m:
            raise InvalidInput(f"level {k} outside 0..{self.m}")
        flat = level_view(self.data, self.d, self.m, k)
        return flat.reshape((self.d,) * k) if k else flat.reshape(())

    def levels(self) -> list[np.ndarray]:
        return [level_view(self.data, self.d, self.m, k).copy() for k in range(self.m + 1)]

    def __getitem__(self, word: tuple[int, ...]) -> float:
        """Coefficient of a word of 1-based letters; ``()`` gives level 0."""
        k = len(word)
        idx = 0
        for a in word:
            idx = idx * self.d + (a - 1)
        return float(self.data[offsets(self.d, self.m)[k] + idx])

    def _same(self, other: "TruncatedTensor") -> None:
        if not isinstance(other, TruncatedTensor):
            raise InvalidInput(f"expected a TruncatedTensor, got {type(other).__name__}")
        if (self.d, self.m) != (other.d, other.m):
            raise InvalidInput(
                f"shape mismatch: (d={self.d}, m={self.m}) vs (d={other.d}, m={other.m})"
            )

    def _wrap(self, data: np.ndarray) -> "TruncatedTensor":
        return TruncatedTensor(self.d, self.m, data)

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        self._same(other)
        return TruncatedTensor(self.d, self.m, self.data + other.data)

    def __sub__(self, other):
        self._same(other)
        return TruncatedTensor(self.d, self.m, self.data - other.data)

    def __neg__(self):
        return TruncatedTensor(self.d, self.m, -self.data)

    def __mul__(self, other):
        if isinstance(other, TruncatedTensor):
            return tensor_mul(self, other)
        return TruncatedTensor(self.d, self.m, self.data * float(other))

    def __rmul__(self, other):
        return TruncatedTensor(self.d, self.m, self.data * float(other))

    def __truediv__(self, c):
        return TruncatedTensor(self.d, self.m, self.data / float(c))

    def __eq__(self, other):
        return (
            isinstance(other, TruncatedTensor)
            and (self.d, self.m) == (other.d, other.m)
            and np.array_equal(self.data, other.data)
        )

    __hash__ = None

    def allclose(self, other: "TruncatedTensor", atol: float = _config.ARITH_TOL) -> bool:
        self._same(other)
        return bool(np.max(np.abs(self.data - other.data)) <= atol)

    def max_deviation(self, other: "TruncatedTensor") -> float:
        self._same(other)
        return float(np.max(np.abs(self.data - other.data)))

    def level_norms(self) -> np.ndarray:
        """Max-abs coefficient of levels 1..m."""
        return flat_level_maxabs(self.data, self.d, self.m)

    def __repr__(self):
        return f"{type(self).__name__}(d={self.d}, m={self.m}, levels={[lv.tolist() for lv in self.levels()]})"

    # -- serialization -----------------------------------------------------
    def to_json_obj(self) -> dict:
        return {"d": self.d, "m": self.m, "levels": [lv.tolist() for lv in self.levels()]}

    def to_json(self) -> str:
        # repr-based float output is the shortest string that round-trips
        return json.dumps(self.to_json_obj())

    @classmethod
    def from_json_obj(cls, obj: dict):
        try:
            d, m, levels = int(obj["d"]), int(obj["m"]), obj["levels"]
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed tensor JSON: {exc}") from None
        if len(levels) != m + 1:
            raise InvalidInput(f"tensor JSON has {len(levels)} levels, expected {m + 1}")
        t = TruncatedTensor.from_levels(levels, d=d)
        return cls._coerce(t)

    @classmethod
    def from_json(cls, text: str):
        return cls.from_json_obj(json.loads(text))

    @classmethod
    def _coerce(cls, t: "TruncatedTensor"):
        return t


class GroupElement(TruncatedTensor):
    """A truncated tensor certified to lie in the free nilpotent group G^m(R^d).

    Construction rejects level 0 != 1 and any element whose logarithm fails
    the Dynkin-Specht-Wever test by more than ``tol``.
    """

    __slots__ = ("_residual",)

    def __init__(self, d: int, m: int, data: Iterable[float], tol: float | None = None):
        super().__init__(d, m, data)
        if self.data[0] != 1.0:
            raise InvalidInput(f"group element needs level 0 equal to 1, got {self.data[0]!r}")
        tol = _config.CERT_TOL if tol is None else tol
        res = float(flat_dynkin_residual(flat_log(self.data, d, m), d, m))
        if res > tol:
            raise NotGroupLike(f"Dynkin residual {res:.3e} exceeds tolerance {tol:.1e}")
        self._residual = res

    @classmethod
    def _trusted(cls, d: int, m: int, data: np.ndarray) -> "GroupElement":
        # result of group operations on certified inputs; certificate is lazy
        obj = cls.__new__(cls)
        TruncatedTensor.__init__(obj, d, m, data)
        obj._residual = None
        return obj

    @classmethod
    def identity(cls, d: int, m: int) -> "GroupElement":
        x = np.zeros(tensor_size(d, m))
        x[0] = 1.0
        return cls._trusted(d, m, x)

    @classmethod
    def _coerce(cls, t: TruncatedTensor):
        return cls(t.d, t.m, t.data)

    @classmethod
    def from_tensor(cls, t: TruncatedTensor, tol: float | None = None) -> "GroupElement":
        return cls(t.d, t.m, t.data, tol=tol)

    @property
    def lie_certificate(self) -> float:
        if self._residual is None:
            self._residual = float(
                flat_dynkin_residual(flat_log(self.data, self.d, self.m), self.d, self.m)
            )
        return self._residual

    def _wrap(self, data):
        return GroupElement._trusted(self.d, self.m, data)

    def inverse(self) -> "GroupElement":
        return inverse(self)

    def log(self) -> "LieElement":
        return LieElement._trusted(self.d, self.m, flat_log(self.data, self.d, self.m))


class LieElement(TruncatedTensor):
    """Element of the free nilpotent Lie algebra, embedded in T^(m)(R^d)."""

    __slots__ = ()

    def __init__(self, d: int, m: int, data: Iterable[float], tol: float | None = None):
        super().__init__(d, m, data)
        if self.data[0] != 0.0:
            raise InvalidInput("Lie element needs level 0 equal to 0")
        tol = _config.CERT_TOL if tol is None else tol
        res = float(flat_dynkin_residual(self.data, d, m))
        if res > tol:
            raise NotGroupLike(f"not a Lie element: Dynkin residual {res:.3e}")

    @classmethod
    def _trusted(cls, d, m, data):
        obj = cls.__new__(cls)
        TruncatedTensor.__init__(obj, d, m, data)
        return obj

    @classmethod
    def _coerce(cls, t: TruncatedTensor):
        return cls(t.d, t.m, t.data)

    def component(self, k: int) -> np.ndarray:
        return level_view(self.data, self.d, self.m, k).copy()

    def exp(self) -> GroupElement:
        return GroupElement._trusted(self.d, self.m, flat_exp(self.data, self.d, self.m))

    def __add__(self, other):
        out = super().__add__(other)
        if isinstance(other, LieElement):
            return LieElement._trusted(self.d, self.m, out.data)
        return out

    def __sub__(self, other):
        out = super().__sub__(other)
        if isinstance(other, LieElement):
            return LieElement._trusted(self.d, self.m, out.data)
        return out

    def __mul__(self, other):
        if isinstance(other, TruncatedTensor):
            return tensor_mul(self, other)
        return LieElement._trusted(self.d, self.m, self.data * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return LieElement._trusted(self.d, self.m, -self.data)


# ---------------------------------------------------------------------------
# operations


def tensor_mul(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    a._same(b)
    data = flat_mul(a.data, b.data, a.d, a.m)
    if isinstance(a, GroupElement) and isinstance(b, GroupElement):
        return GroupElement._trusted(a.d, a.m, data)
    return TruncatedTensor(a.d, a.m, data)


def _require_unit(g: TruncatedTensor) -> None:
    if g.data[0] != 1.0:
        raise InvalidInput(f"operation needs level 0 equal to 1, got {g.data[0]!r}")


def inverse(g: TruncatedTensor) -> TruncatedTensor:
    """Inverse in T~^(m), by the alternating series in the levels of g."""
    _require_unit(g)
    data = flat_inverse(g.data, g.d, g.m)
    if isinstance(g, GroupElement):
        return GroupElement._trusted(g.d, g.m, data)
    return TruncatedTensor(g.d, g.m, data)


def exp_t(ell: TruncatedTensor) -> TruncatedTensor:
    if ell.data[0] != 0.0:
        raise InvalidInput("exp needs level 0 equal to 0")
    data = flat_exp(ell.data, ell.d, ell.m)
    if isinstance(ell, LieElement):
        return GroupElement._trusted(ell.d, ell.m, data)
    return TruncatedTensor(ell.d, ell.m, data)


def log_t(g: TruncatedTensor) -> TruncatedTensor:
    _require_unit(g)
    data = flat_log(g.data, g.d, g.m)
    if isinstance(g, GroupElement):
        return LieElement._trusted(g.d, g.m, data)
    return TruncatedTensor(g.d, g.m, data)


def dilate(g: TruncatedTensor, t: float) -> TruncatedTensor:
    """Scale level k by t**k."""
    data = flat_dilate(g.data, t, g.d, g.m)
    if isinstance(g, GroupElement):
        return GroupElement._trusted(g.d, g.m, data)
    if isinstance(g, LieElement):
        return LieElement._trusted(g.d, g.m, data)
    return TruncatedTensor(g.d, g.m, data)


def lie_bracket(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    a._same(b)
    data = flat_mul(a.data, b.data, a.d, a.m) - flat_mul(b.data, a.data, a.d, a.m)
    if isinstance(a, LieElement) and isinstance(b, LieElement):
        return LieElement._trusted(a.d, a.m, data)
    return TruncatedTensor(a.d, a.m, data)


def group_like_check(g: TruncatedTensor, tol: float | None = None) -> tuple[bool, float]:
    """Certify membership of g in G^m(R^d) via the Dynkin map on log g."""
    _require_unit(g)
    tol = _config.CERT_TOL if tol is None else tol
    res = float(flat_dynkin_residual(flat_log(g.data, g.d, g.m), g.d, g.m))
    return res <= tol, res


def lie_vector(v: Iterable[float], m: int) -> LieElement:
    t = TruncatedTensor.from_vector(v, m)
    return LieElement._trusted(t.d, t.m, t.data)


def lie_generator(d: int, m: int, i: int) -> LieElement:
    """The basis vector e_i (1-based) as a Lie element."""
    t = TruncatedTensor.word(d, m, (i,))
    return LieElement._trusted(d, m, t.data)


def group_exp(v: Iterable[float], m: int) -> GroupElement:
    """exp of a vector embedded at level 1: the signature of a straight segment."""
    return exp_t(lie_vector(v, m))
