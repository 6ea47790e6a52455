"""Randomized properties driven by hypothesis."""
import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from georough import (
    GroupElement,
    PiecewisePath,
    dilate,
    exp_t,
    inverse,
    lift,
    lnorm,
    log_t,
    path_signature,
    realize,
    tensor_mul,
    tnorm,
    wiener_profile,
)
from georough.lyndon import bracket_matrix
from georough.metrics import smallest_control
from georough.tensor import LieElement, offsets

SETTINGS = settings(max_examples=40, deadline=None)
coef = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
shapes = st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3), (2, 4)])


@st.composite
def lie_elements(draw, shape=None):
    d, m = draw(shapes) if shape is None else shape
    off = offsets(d, m)
    x = np.zeros(off[-1])
    for k in range(1, m + 1):
        B = bracket_matrix(d, k)
        c = draw(arrays(np.float64, B.shape[1], elements=coef))
        x[off[k]:off[k + 1]] = B @ c
    return LieElement(d, m, x)


@st.composite
def paths(draw, d=2):
    k = draw(st.integers(2, 12))
    pts = draw(arrays(np.float64, (k + 1, d), elements=st.floats(-2.0, 2.0, allow_nan=False)))
    return PiecewisePath(np.linspace(0, 1, k + 1), pts)


@SETTINGS
@given(lie_elements())
def test_log_exp_round_trip(ell):
    assert log_t(exp_t(ell)).max_deviation(ell) < 1e-9 * max(1.0, float(np.abs(ell.data).max()) ** ell.m)


@SETTINGS
@given(lie_elements(), st.floats(-4.0, 4.0, allow_nan=False))
def test_norms_are_homogeneous(ell, lam):
    g = exp_t(ell)
    for f in (lnorm, tnorm):
        assert abs(f(dilate(g, lam)) - abs(lam) * f(g)) <= 1e-9 * (1 + abs(lam) * f(g))


@SETTINGS
@given(lie_elements())
def test_lnorm_is_symmetric(ell):
    g = exp_t(ell)
    assert abs(lnorm(inverse(g)) - lnorm(g)) <= 1e-9 * (1 + lnorm(g))


@SETTINGS
@given(paths(), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_chen_identity(x, a, b):
    r, s = sorted((a, b))
    lhs = tensor_mul(path_signature(x, 0, r, 3), path_signature(x, r, s, 3))
    rhs = path_signature(x, 0, s, 3)
    assert np.max(np.abs(lhs.data - rhs.data)) < 1e-10 * max(1.0, float(np.abs(rhs.data).max()))


@SETTINGS
@given(paths(), st.floats(1.0, 3.5))
def test_smallest_control_superadditive(x, p):
    W = smallest_control(lift(x, 2), p).values
    n = W.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                assert W[i, j] + W[j, k] <= W[i, k] * (1 + 1e-12) + 1e-12


@SETTINGS
@given(paths(), st.floats(1.2, 3.0))
def test_wiener_monotone(x, p):
    Y = lift(x, 2)
    lad = np.linspace(np.diff(Y.times).max(), 1.0, 6)
    v = wiener_profile(Y, p, lad)
    assert np.all(np.diff(v) >= -1e-12 * max(1.0, v.max()))


@settings(max_examples=25, deadline=None)
@given(lie_elements((2, 3)))
def test_realizer_hits_target(ell):
    g = GroupElement(2, 3, exp_t(ell).data)
    r = realize(g)
    assert r.residual < 1e-9 * max(1.0, float(np.abs(g.data).max()))
