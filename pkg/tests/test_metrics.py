from math import factorial, pi, sqrt, tan

import numpy as np
import pytest

from georough import (
    GroupElement,
    InvalidInput,
    NotGroupLike,
    PiecewisePath,
    PowerControl,
    SampledGroupPath,
    TruncatedTensor,
    Unsupported,
    cc_bounds,
    cc_lower,
    dilate,
    dist,
    exp_t,
    group_exp,
    inverse,
    lie_bracket,
    lie_generator,
    lift,
    lnorm,
    log_t,
    modulus_distance,
    path_signature,
    pure_area_path,
    pvar_distance,
    pvar_norm,
    smallest_control,
    sup_distances,
    tensor_mul,
    tnorm,
)
from georough.metrics import brute_force_control, norm_table, sup_norm

from tests import oracle
from tests.conftest import random_group, random_points


def area(a, m=2, d=2):
    return exp_t(a * lie_bracket(lie_generator(d, m, 1), lie_generator(d, m, 2)))


def scalar_line(times):
    t = np.asarray(times, dtype=float)
    return lift(PiecewisePath(t, t[:, None]), 1)


def random_sampled(rng, d, m, n, k=None):
    k = k or n
    t = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, k - 1)), [1.0]])
    x = PiecewisePath(t, random_points(rng, d, k) * 0.6)
    return lift(x, m, np.linspace(0, 1, n))


# -- norms -------------------------------------------------------------------------


def test_tnorm_examples():
    assert tnorm(GroupElement.identity(2, 3)) == 0.0
    assert tnorm(group_exp([1, 0], 2)) == pytest.approx(1.0)
    a = -0.37
    assert tnorm(area(a)) == pytest.approx(sqrt(2 * abs(a)), rel=1e-15)


def test_lnorm_examples(rng):
    assert lnorm(GroupElement.identity(3, 3)) == 0.0
    v = rng.normal(size=3)
    assert lnorm(group_exp(v, 3)) == pytest.approx(np.abs(v).max(), rel=1e-14)
    assert lnorm(area(2.25)) == pytest.approx(1.5, rel=1e-15)


@pytest.mark.parametrize("d,m", [(2, 2), (2, 4), (3, 3), (3, 5)])
def test_tnorm_matches_oracle(rng, d, m):
    g = random_group(rng, d, m)
    assert tnorm(g) == pytest.approx(oracle.factorial_tnorm(oracle.to_dict(g), m), rel=1e-13)


@pytest.mark.parametrize("norm", [tnorm, lnorm])
@pytest.mark.parametrize("d,m", [(2, 3), (3, 4)])
def test_homogeneity(rng, norm, d, m):
    for _ in range(20):
        g = random_group(rng, d, m)
        t = rng.uniform(-3, 3)
        assert norm(dilate(g, t)) == pytest.approx(abs(t) * norm(g), rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("d,m", [(2, 3), (3, 4)])
def test_lnorm_symmetric(rng, d, m):
    for _ in range(20):
        g = random_group(rng, d, m)
        assert lnorm(inverse(g)) == pytest.approx(lnorm(g), rel=1e-12)


def test_tnorm_subadditive(rng):
    for _ in range(200):
        g, h = random_group(rng, 3, 4), random_group(rng, 3, 4)
        assert tnorm(tensor_mul(g, h)) <= (tnorm(g) + tnorm(h)) * (1 + 1e-12)


def test_norms_vanish_only_at_identity(rng):
    g = random_group(rng, 2, 3, 1e-3)
    assert tnorm(g) > 0 and lnorm(g) > 0


def test_norms_reject_bad_inputs():
    with pytest.raises(InvalidInput):
        tnorm(TruncatedTensor.zero(2, 2))
    bad = TruncatedTensor.one(2, 2) + TruncatedTensor.word(2, 2, (1, 2))
    with pytest.raises(NotGroupLike):
        lnorm(bad)


# -- CC bounds -------------------------------------------------------------------


def test_cc_bounds_of_a_segment(rng):
    v = rng.normal(size=3)
    lo, up = cc_bounds(group_exp(v, 3))
    assert lo == pytest.approx(np.linalg.norm(v), rel=1e-14)
    assert up == pytest.approx(np.linalg.norm(v), rel=1e-14)


def test_cc_bounds_of_pure_area():
    for a in (1.0, 0.3, -2.0):
        lo, up = cc_bounds(area(a))
        assert lo == pytest.approx(2 * sqrt(pi * abs(a)), rel=1e-12)
        assert up == pytest.approx(4 * sqrt(abs(a)), rel=1e-12)


def test_isoperimetric_oracle_for_area_bound():
    # regular N-gons enclosing area a have length sqrt(4 N tan(pi/N) a), decreasing to the circle
    a = 0.8
    lo = cc_lower(area(a))
    prev = np.inf
    for N in (3, 4, 6, 12, 48, 400, 4000):
        ang = 2 * pi * np.arange(N + 1) / N
        r = sqrt(2 * a / (N * np.sin(2 * pi / N)))
        pts = np.c_[r * np.cos(ang), r * np.sin(ang)] - [r, 0]
        x = PiecewisePath(np.linspace(0, 1, N + 1), pts)
        g = path_signature(x, 0, 1, 2)
        assert g[(1, 2)] == pytest.approx(a, rel=1e-10)
        L = x.length()
        assert L == pytest.approx(sqrt(4 * N * tan(pi / N) * a), rel=1e-10)
        assert lo <= L < prev
        prev = L
    assert prev == pytest.approx(lo, rel=1e-6)


def test_cc_lower_below_random_realizations(rng):
    for _ in range(300):
        d = int(rng.integers(2, 4))
        x = PiecewisePath(np.linspace(0, 1, 6), random_points(rng, d, 5))
        g = path_signature(x, 0, 1, 3)
        assert cc_lower(g) <= x.length() * (1 + 1e-12)


def test_cc_bounds_ordered_and_symmetric(rng):
    for _ in range(100):
        g = random_group(rng, 3, 2)
        lo, up = cc_bounds(g)
        assert lo <= up
        lo2, up2 = cc_bounds(inverse(g))
        assert lo2 == pytest.approx(lo, rel=1e-12)
        assert up2 == pytest.approx(up, rel=1e-12)


def test_cc_bounds_unsupported_step(rng):
    with pytest.raises(Unsupported):
        cc_bounds(random_group(rng, 2, 4))


# -- invariant distances ----------------------------------------------------------


def test_dist_examples(rng):
    g = random_group(rng, 2, 3)
    one = GroupElement.identity(2, 3)
    for side in ("left", "right"):
        for norm in ("l", "t"):
            assert dist(g, g, side, norm) == 0.0
            # a copy built by a round trip differs by roundoff, seen through a cube root
            g2 = inverse(inverse(g))
            assert dist(g, g2, side, norm) < 1e-4
            ref = lnorm(g) if norm == "l" else tnorm(g)
            assert dist(one, g, side, norm) == pytest.approx(ref, rel=1e-13)
    e1, e2 = group_exp([1, 0], 2), group_exp([0, 1], 2)
    L1, L2 = lie_generator(2, 2, 1), lie_generator(2, 2, 2)
    want = lnorm(exp_t(L2 - L1 - 0.5 * lie_bracket(L1, L2)))
    assert dist(e1, e2, "left", "l") == pytest.approx(want, rel=1e-14)
    assert want == pytest.approx(1.0)


def test_left_and_right_distances_differ_in_general(rng):
    g, h = random_group(rng, 2, 3), random_group(rng, 2, 3)
    left = dist(g, h, "left")
    right = dist(g, h, "right")
    assert left == pytest.approx(lnorm(tensor_mul(inverse(g), h)))
    assert right == pytest.approx(lnorm(tensor_mul(g, inverse(h))))
    assert abs(left - right) > 1e-6


def test_dist_rejects_mismatch_and_bad_side(rng):
    with pytest.raises(InvalidInput):
        dist(random_group(rng, 2, 2), random_group(rng, 2, 3))
    with pytest.raises(InvalidInput):
        dist(random_group(rng, 2, 2), random_group(rng, 2, 2), "up")


def test_topology_equivalence_both_directions(rng):
    g = random_group(rng, 3, 3)
    h = random_group(rng, 3, 3)
    lg, lh = log_t(g), log_t(h)
    # coordinatewise convergence g_n -> g forces both distances to zero
    for side in ("left", "right"):
        ds = [dist(g, exp_t(lg + s * (lh - lg)), side) for s in (1e-2, 1e-4, 1e-6, 1e-8)]
        assert all(a > b for a, b in zip(ds, ds[1:])) and ds[-1] < 1e-2
    # and distances going to zero force coordinatewise convergence
    for s in (1e-1, 1e-3, 1e-5):
        gn = tensor_mul(g, dilate(h, s))
        assert dist(g, gn) == pytest.approx(s * lnorm(h), rel=1e-9)
        assert np.max(np.abs(gn.data - g.data)) < 50 * s


def test_coordinate_ratio_bounded_empirically(rng):
    # d(g,h) <= C max{1, ||g||} (max_i |h^i - g^i|)^(1/m) on samples with coordinate gap <= 1
    for d, m in ((2, 2), (2, 3), (3, 3)):
        ratios = []
        for _ in range(300):
            g = random_group(rng, d, m)
            h = tensor_mul(g, random_group(rng, d, m, 10 ** rng.uniform(-4, -0.5)))
            gap = float(np.abs(h.data - g.data).max())
            if gap > 1:
                continue
            ratios.append(dist(g, h) / (max(1.0, lnorm(g)) * gap ** (1.0 / m)))
        assert 0 < max(ratios) < 20


# -- sampled distances ----------------------------------------------------------


def test_sup_distances_examples(rng, backend):
    Y = random_sampled(rng, 2, 2, 20)
    assert sup_distances(Y, Y) == (0.0, 0.0)
    X = random_sampled(rng, 2, 2, 20)
    d_inf, d_tilde = sup_distances(X, Y)
    assert d_tilde <= d_inf
    A = pure_area_path(1.3, 3)
    I = SampledGroupPath.identity_path(A.times, 2, 2)
    assert sup_distances(A, I)[0] == pytest.approx(lnorm(A.value(2)))


def test_sup_distances_brute_force(rng, backend):
    X, Y = random_sampled(rng, 2, 3, 9), random_sampled(rng, 2, 3, 9)
    n = len(X)
    pairs = [dist(X.increment(i, j), Y.increment(i, j)) for i in range(n) for j in range(i + 1, n)]
    points = [dist(X.value(j), Y.value(j)) for j in range(1, n)]
    d_inf, d_tilde = sup_distances(X, Y)
    assert d_inf == pytest.approx(max(pairs), rel=1e-13)
    assert d_tilde == pytest.approx(max(points), rel=1e-13)


def test_grid_mismatch_rejected(rng):
    with pytest.raises(InvalidInput):
        sup_distances(random_sampled(rng, 2, 2, 5), random_sampled(rng, 2, 2, 6))
    with pytest.raises(InvalidInput):
        pvar_distance(random_sampled(rng, 2, 2, 5), random_sampled(rng, 2, 3, 5), 2)


def test_modulus_distance_examples(rng):
    X = scalar_line(np.linspace(0, 1, 9))
    I = SampledGroupPath.identity_path(X.times, 1, 1)
    assert modulus_distance(X, X, PowerControl(1.0), 2) == 0.0
    assert modulus_distance(X, I, PowerControl(1.0), 2) == pytest.approx(1.0, rel=1e-14)
    Y = random_sampled(rng, 2, 2, 12)
    Z = random_sampled(rng, 2, 2, 12)
    a = modulus_distance(Y, Z, PowerControl(1.0), 2)
    b = modulus_distance(Y, Z, PowerControl(1.0, scale=2.0), 2)
    assert b == pytest.approx(a / sqrt(2), rel=1e-13)


def test_modulus_is_holder_distance(rng):
    Y, Z = random_sampled(rng, 2, 2, 10), random_sampled(rng, 2, 2, 10)
    t = Y.times
    want = max(dist(Y.increment(i, j), Z.increment(i, j)) / (t[j] - t[i]) ** 0.5
               for i in range(10) for j in range(i + 1, 10))
    assert modulus_distance(Y, Z, PowerControl(1.0), 2) == pytest.approx(want, rel=1e-13)


def test_modulus_rejects_vanishing_control():
    X = scalar_line(np.linspace(0, 1, 5))
    with pytest.raises(InvalidInput):
        modulus_distance(X, X, PowerControl(1.0, scale=0.0), 2)
    with pytest.raises(InvalidInput):
        modulus_distance(X, X, PowerControl(1.0), 1.0)


def test_pvar_examples(backend):
    X = scalar_line([0, 0.5, 1])
    assert pvar_norm(X, 1) == pytest.approx(1.0)
    assert pvar_norm(X, 2) == pytest.approx(1.0)
    zz = lift(PiecewisePath([0, 0.5, 1], [[0.0], [1.0], [0.0]]), 1)
    assert pvar_norm(zz, 1) == pytest.approx(2.0)
    assert pvar_distance(X, X, 2.5) == 0.0


def test_pvar_matches_exhaustive_subdivisions(rng, backend):
    for _ in range(10):
        X, Y = random_sampled(rng, 2, 2, 9), random_sampled(rng, 2, 2, 9)
        n = len(X)
        p = rng.uniform(1, 4)
        P = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                P[i, j] = dist(X.increment(i, j), Y.increment(i, j)) ** p
        want = brute_force_control(P)[0, -1] ** (1 / p)
        assert pvar_distance(X, Y, p) == pytest.approx(want, rel=1e-12)


def test_pvar_norm_is_end_to_end_control(rng, backend):
    Y = random_sampled(rng, 3, 2, 30)
    for p in (1.0, 2.0, 2.7):
        table = smallest_control(Y, p)
        I = SampledGroupPath.identity_path(Y.times, 3, 2)
        assert pvar_distance(Y, I, p) == pytest.approx(table.values[0, -1] ** (1 / p), rel=1e-12)
        assert pvar_norm(Y, p) == pytest.approx(table.values[0, -1] ** (1 / p), rel=1e-12)


def test_pvar_rejects_small_p(rng):
    with pytest.raises(InvalidInput):
        pvar_norm(random_sampled(rng, 2, 2, 4), 0.5)


# -- smallest control --------------------------------------------------------------


def test_smallest_control_single_pair(rng):
    Y = random_sampled(rng, 2, 2, 2)
    assert smallest_control(Y, 2).values[0, 1] == pytest.approx(lnorm(Y.value(1)) ** 2)


def test_smallest_control_monotone_scalar(backend):
    t = np.linspace(0, 1, 11)
    tab = smallest_control(scalar_line(t), 2).values
    want = (t[None, :] - t[:, None]) ** 2
    iu = np.triu_indices(11, 1)
    assert np.max(np.abs(tab[iu] - want[iu])) < 1e-14


def test_smallest_control_pure_area_is_additive(backend):
    Y = pure_area_path(1.0, 9)
    tab = smallest_control(Y, 2, "t").values
    t = Y.times
    iu = np.triu_indices(9, 1)
    want = 2 * (t[None, :] - t[:, None])
    assert np.max(np.abs(tab[iu] - want[iu])) < 1e-13


@pytest.mark.parametrize("n", [2, 3, 7, 12])
def test_smallest_control_equals_enumeration(rng, backend, n):
    for _ in range(5):
        Y = random_sampled(rng, 2, 2, n, k=max(n, 3))
        p = rng.uniform(1, 3)
        P = norm_table(Y) ** p
        assert np.array_equal(smallest_control(Y, p).values, brute_force_control(P))


def test_smallest_control_superadditive(rng, backend):
    Y = random_sampled(rng, 2, 3, 15)
    tab = smallest_control(Y, 2.5).values
    n = tab.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                assert tab[i, j] + tab[j, k] <= tab[i, k] * (1 + 1e-12)


# -- interpolation inequalities ------------------------------------------------------


def test_interpolation_inequalities(rng):
    p, q = 2.0, 3.0
    omega = PowerControl(1.0)
    for _ in range(30):
        Y, Z = random_sampled(rng, 2, 2, 12), random_sampled(rng, 2, 2, 12)
        d_inf = sup_distances(Y, Z)[0]
        lhs = modulus_distance(Y, Z, omega, q)
        rhs = d_inf ** (1 - p / q) * modulus_distance(Y, Z, omega, p) ** (p / q)
        assert rhs - lhs >= -1e-10
        lhs = pvar_distance(Y, Z, q)
        rhs = d_inf ** (1 - p / q) * pvar_distance(Y, Z, p) ** (p / q)
        assert rhs - lhs >= -1e-10


def test_sup_norm_is_max_pair_norm(rng):
    Y = random_sampled(rng, 2, 2, 8)
    want = max(lnorm(Y.increment(i, j)) for i in range(8) for j in range(i + 1, 8))
    assert sup_norm(Y) == pytest.approx(want)


def test_factorial_helper_sanity():
    # tnorm of exp(e1) reads max(1, (2! * 1/2)^(1/2)) = 1 level by level
    g = group_exp([1, 0], 2)
    assert max(abs(g[(1,)]), sqrt(factorial(2) * g[(1, 1)])) == 1.0
