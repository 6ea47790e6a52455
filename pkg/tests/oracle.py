"""Independent reference arithmetic: tensors as {word: coeff} dictionaries.

Nothing here touches georough's flat layout except the two converters, so
agreement with the library checks the layout and the algebra together.
"""
from __future__ import annotations

from itertools import product
from math import factorial

import numpy as np


def words(d, k):
    return list(product(range(1, d + 1), repeat=k))


def to_dict(t):
    out = {}
    pos = 0
    for k in range(t.m + 1):
        for w in words(t.d, k):
            c = float(t.data[pos])
            if c != 0.0:
                out[w] = c
            pos += 1
    return out


def from_dict(x, d, m):
    data = []
    for k in range(m + 1):
        data.extend(x.get(w, 0.0) for w in words(d, k))
    return np.array(data)


def mul(a, b, m):
    out = {}
    for u, cu in a.items():
        for v, cv in b.items():
            if len(u) + len(v) <= m:
                w = u + v
                out[w] = out.get(w, 0) + cu * cv
    return out


def add(a, b, s=1):
    out = dict(a)
    for w, c in b.items():
        out[w] = out.get(w, 0) + s * c
    return out


def scale(a, s):
    return {w: s * c for w, c in a.items()}


def one():
    return {(): 1}


def exp(x, m):
    # x has no empty word
    out = one()
    term = one()
    for n in range(1, m + 1):
        term = scale(mul(term, x, m), 1.0 / n)
        out = add(out, term)
    return out


def log(g, m):
    x = {w: c for w, c in g.items() if w}
    out = {}
    term = one()
    for n in range(1, m + 1):
        term = mul(term, x, m)
        out = add(out, scale(term, (-1) ** (n + 1) / n))
    return out


def inverse(g, m):
    x = {w: c for w, c in g.items() if w}
    out = one()
    term = one()
    for n in range(1, m + 1):
        term = mul(term, x, m)
        out = add(out, scale(term, (-1) ** n))
    return out


def bracket(a, b, m):
    return add(mul(a, b, m), mul(b, a, m), -1)


def dynkin(x, m):
    """Right-bracketing of letters: D(e_i1..e_ik) = [..[e_i1, e_i2], .., e_ik]."""
    out = {}
    for w, c in x.items():
        if not w:
            continue
        acc = {(w[0],): 1}
        for a in w[1:]:
            acc = bracket(acc, {(a,): 1}, m)
        out = add(out, scale(acc, c))
    return out


def level(x, k):
    return {w: c for w, c in x.items() if len(w) == k}


def maxabs(x):
    return max((abs(c) for c in x.values()), default=0.0)


def segment(v, m):
    return exp({(i + 1,): float(c) for i, c in enumerate(v) if c != 0}, m) if np.any(v) else one()


def path_sig(points, m):
    g = one()
    for a, b in zip(points[:-1], points[1:]):
        g = mul(g, segment(np.asarray(b) - np.asarray(a), m), m)
    return g


def factorial_tnorm(g, m):
    return max((factorial(k) * maxabs(level(g, k))) ** (1.0 / k) for k in range(1, m + 1))
