import numpy as np
import pytest

from georough import (
    GroupElement,
    InvalidInput,
    PiecewisePath,
    cc_lower,
    group_exp,
    inverse,
    lift,
    path_signature,
    segment_signature,
    tensor_mul,
)
from georough.signature import signature_prefix

from tests import oracle
from tests.conftest import random_points


def square():
    return PiecewisePath(np.linspace(0, 1, 5), [[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]])


def random_path(rng, d, k):
    t = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, k - 1)), [1.0]])
    return PiecewisePath(t, random_points(rng, d, k))


def test_segment_examples():
    assert segment_signature([0.0, 0.0], 3) == GroupElement.identity(2, 3)
    g = segment_signature([1.0, 0.0], 2)
    assert g.level(1).tolist() == [1.0, 0.0]
    assert g.level(2).tolist() == [[0.5, 0.0], [0.0, 0.0]]
    g = segment_signature([1.0, 2.0], 3)
    assert g[(1, 1, 1)] == pytest.approx(1 / 6, abs=1e-16)
    assert np.max(np.abs(g.data - oracle.from_dict(oracle.segment(np.array([1.0, 2.0]), 3), 2, 3))) < 1e-15


def test_empty_interval_is_identity(rng):
    x = random_path(rng, 2, 5)
    assert path_signature(x, 0.3, 0.3, 3) == GroupElement.identity(2, 3)


def test_unit_square_loop_is_pure_area(backend):
    g = path_signature(square(), 0, 1, 2)
    assert np.max(np.abs(g.level(1))) < 1e-15
    assert np.max(np.abs(g.level(2) - np.array([[0.0, 1.0], [-1.0, 0.0]]))) < 1e-15
    want = oracle.from_dict(oracle.path_sig(square().points, 2), 2, 2)
    assert np.max(np.abs(g.data - want)) < 1e-15


def test_two_segments_equal_product(backend):
    x = PiecewisePath([0, 0.5, 1], [[0, 0], [1, 0], [1, 1]])
    g = path_signature(x, 0, 1, 2)
    want = tensor_mul(group_exp([1, 0], 2), group_exp([0, 1], 2))
    assert g.max_deviation(want) < 1e-15


@pytest.mark.parametrize("d,m", [(1, 4), (2, 3), (3, 4)])
def test_path_signature_matches_oracle(rng, backend, d, m):
    x = random_path(rng, d, 7)
    want = oracle.from_dict(oracle.path_sig(x.points, m), d, m)
    assert np.max(np.abs(path_signature(x, 0, 1, m).data - want)) < 1e-12


@pytest.mark.parametrize("d,m", [(2, 3), (3, 4)])
def test_chen_identity(rng, backend, d, m):
    x = random_path(rng, d, 12)
    r, s = np.sort(rng.uniform(0, 1, 2))
    lhs = tensor_mul(path_signature(x, 0, r, m), path_signature(x, r, s, m))
    assert lhs.max_deviation(path_signature(x, 0, s, m)) < 1e-12


def test_split_inside_a_segment_is_exact():
    x = PiecewisePath([0, 1], [[0, 0], [2, 4]])
    g = path_signature(x, 0.25, 0.75, 3)
    assert g.max_deviation(group_exp([1, 2], 3)) < 1e-15


def test_reversal_gives_inverse(rng):
    x = random_path(rng, 3, 8)
    g = path_signature(x, 0, 1, 4)
    r = path_signature(x.reversed(), 0, 1, 4)
    assert r.max_deviation(inverse(g)) < 1e-12


def test_collinear_refinement_is_invisible(rng):
    x = random_path(rng, 2, 6)
    y = x.refine(rng.uniform(0, 1, 5))
    assert len(y) > len(x)
    assert path_signature(y, 0, 1, 4).max_deviation(path_signature(x, 0, 1, 4)) < 1e-12


def test_s_after_t_rejected():
    with pytest.raises(InvalidInput):
        path_signature(square(), 0.6, 0.4, 2)


def test_length_is_additive(rng):
    x = random_path(rng, 3, 9)
    s, t, u = np.sort(rng.uniform(0, 1, 3))
    assert x.length(s, u) == pytest.approx(x.length(s, t) + x.length(t, u), rel=1e-13)
    assert square().length() == pytest.approx(4.0)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_cc_lower_bound_below_length(rng, m):
    for _ in range(50):
        x = random_path(rng, 2 + (m == 3), 6)
        s, t = np.sort(rng.uniform(0, 1, 2))
        assert cc_lower(path_signature(x, s, t, m)) <= x.length(s, t) * (1 + 1e-12)


def test_prefix_and_lift_agree(rng, backend):
    x = random_path(rng, 2, 6)
    pre = signature_prefix(x, 3)
    for i, t in enumerate(x.times):
        assert np.max(np.abs(pre[i] - path_signature(x, 0, t, 3).data)) < 1e-13
    grid = np.linspace(0, 1, 11)
    Y = lift(x, 3, grid)
    for i, t in enumerate(grid):
        assert np.max(np.abs(Y.values[i] - path_signature(x, 0, t, 3).data)) < 1e-13


def test_lift_extends_short_paths_constantly():
    x = PiecewisePath([0, 0.5], [[0.0], [1.0]])
    Y = lift(x, 2)
    assert Y.times.tolist() == [0.0, 0.5, 1.0]
    assert np.array_equal(Y.values[1], Y.values[2])


def test_csv_round_trip_is_exact(rng):
    x = random_path(rng, 3, 7)
    y = PiecewisePath.from_csv(x.to_csv())
    assert np.array_equal(x.times, y.times) and np.array_equal(x.points, y.points)
    assert x.to_csv().splitlines()[0] == "t,x1,x2,x3"


@pytest.mark.parametrize("bad", [
    ([0.1, 1.0], [[0], [1]]),
    ([0.0, 0.0], [[0], [1]]),
    ([0.0, 1.5], [[0], [1]]),
    ([0.0, 1.0], [[0]]),
])
def test_path_validation(bad):
    with pytest.raises(InvalidInput):
        PiecewisePath(*bad)


def test_bit_stable_evaluation(rng):
    x = random_path(rng, 3, 50)
    a = path_signature(x, 0, 1, 4).data
    b = path_signature(x, 0, 1, 4).data
    assert np.array_equal(a, b)
