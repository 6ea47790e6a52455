"""Lyndon words and the Hall-type bracket basis they index.

Words use 0-based letters internally.  The standard bracketing of a Lyndon
word w = uv (v its longest proper Lyndon suffix) is [b(u), b(v)]; its
expansion has leading word w, so the bracket polynomials of all Lyndon words
of length k form a basis of the degree-k free Lie component.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def lyndon_words(d: int, k: int) -> tuple[tuple[int, ...], ...]:
    """All Lyndon words of length exactly k over {0..d-1}, lexicographic (Duval)."""
    out = []
    w = [-1]
    while w:
        w[-1] += 1
        if len(w) == k:
            out.append(tuple(w))
        n = len(w)
        while len(w) < k:
            w.append(w[len(w) - n])
        while w and w[-1] == d - 1:
            w.pop()
    return tuple(out)


def is_lyndon(w) -> bool:
    w = tuple(w)
    return len(w) > 0 and all(w < w[i:] + w[:i] for i in range(1, len(w)))


def standard_factor(w: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """(u, v) with v the longest proper suffix of w that is Lyndon."""
    for i in range(1, len(w)):
        if is_lyndon(w[i:]):
            return w[:i], w[i:]
    raise ValueError(f"{w} has no standard factorization")


def bracket_tree(w: tuple[int, ...]):
    """Nested tuples: a letter is an int, a bracket is a pair (left, right)."""
    if len(w) == 1:
        return w[0]
    u, v = standard_factor(w)
    return (bracket_tree(u), bracket_tree(v))


def _expand(tree, d: int) -> np.ndarray:
    """Tensor expansion of a bracket tree as a flat length-d^k vector."""
    if isinstance(tree, int):
        e = np.zeros(d)
        e[tree] = 1.0
        return e
    a = _expand(tree[0], d)
    b = _expand(tree[1], d)
    return np.outer(a, b).reshape(-1) - np.outer(b, a).reshape(-1)


@lru_cache(maxsize=None)
def bracket_matrix(d: int, k: int) -> np.ndarray:
    """Columns are the tensor expansions of the standard brackets of the Lyndon words."""
    words = lyndon_words(d, k)
    if not words:
        return np.zeros((d**k, 0))
    B = np.stack([_expand(bracket_tree(w), d) for w in words], axis=1)
    B.setflags(write=False)
    return B


@lru_cache(maxsize=None)
def _pinv(d: int, k: int) -> np.ndarray:
    P = np.linalg.pinv(bracket_matrix(d, k))
    P.setflags(write=False)
    return P


def lyndon_coordinates(lk: np.ndarray, d: int, k: int) -> np.ndarray:
    """Coordinates of a degree-k Lie polynomial (flat tensor) in the Lyndon bracket basis."""
    return _pinv(d, k) @ np.asarray(lk, dtype=np.float64)
