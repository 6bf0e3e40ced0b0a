import numpy as np
import pytest

from sprtree import metric, rtree
from sprtree.metric import (
    FiniteMetricSpace, WeightedSpace, AtomicMeasure, Correspondence)
from sprtree.rtree import PointRef
from sprtree.util import DomainError

from . import lib


def line(*positions):
    positions = np.array(positions, dtype=float)
    return FiniteMetricSpace(np.abs(positions[:, None] - positions[None, :]))


def test_space_validation():
    """Distance matrices must be symmetric metrics"""
    with pytest.raises(DomainError):
        FiniteMetricSpace([[0, 1], [2, 0]])
    with pytest.raises(DomainError):
        FiniteMetricSpace([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    with pytest.raises(DomainError):
        FiniteMetricSpace([[1]])
    with pytest.raises(DomainError):
        WeightedSpace([[0, 1], [1, 0]], [0.5, 0.25])


def test_correspondence_must_cover_both_sides():
    """Every point of X and of Y needs a partner"""
    with pytest.raises(DomainError):
        Correspondence([(0, 0)], (2, 1))
    R = Correspondence.from_maps([0, 0], [1])
    assert R.pairs == [(0, 0), (1, 0)]


def test_distortion():
    """dis(R) is the largest mismatch over related pairs"""
    X, Y = line(0, 1, 2), line(0, 1, 3)
    identity = [(0, 0), (1, 1), (2, 2)]
    assert metric.distortion(X, Y, identity) == pytest.approx(1.0)
    assert metric.distortion(X, X, identity) == 0.0
    assert metric.map_distortion(X, Y, [0, 1, 2]) == pytest.approx(1.0)
    assert metric.cover_radius(Y, [0, 1]) == pytest.approx(2.0)


def test_gh_point_to_pair():
    """A point is at distance half the diameter from any space"""
    bounds = metric.gh(line(0), line(0, 2))
    assert bounds.exact
    assert bounds.lower == bounds.upper == pytest.approx(1.0)


def test_gh_of_a_space_with_itself():
    """gh(X, X) = 0, exactly and through the search"""
    X = line(0, 1, 3, 7)
    assert metric.gh(X, X).upper == 0.0
    assert metric.gh(X, X, exact_limit=0).upper == 0.0


def test_gh_bracket_holds_the_exact_value():
    """The searched bracket contains the exhaustive answer"""
    rng = np.random.default_rng(6)
    for _ in range(5):
        X = line(*rng.uniform(0, 4, 3))
        Y = line(*rng.uniform(0, 4, 4))
        exact = metric.gh(X, Y, exact_limit=12)
        bracket = metric.gh(X, Y, exact_limit=0, restarts=8, rng=rng)
        assert exact.exact and not bracket.exact
        assert bracket.lower <= exact.upper + 1e-12
        assert exact.upper <= bracket.upper + 1e-12
        assert metric.distortion(X, Y, exact.witness) / 2 == \
            pytest.approx(exact.upper)


def test_prohorov_dirac_masses():
    """Unit masses one apart are at Prohorov distance one"""
    X = line(0, 1)
    assert metric.prohorov(X, [1.0, 0.0], [0.0, 1.0]) == 1.0
    assert metric.prohorov(X, [1.0, 0.0], [1.0, 0.0]) == 0.0


def test_prohorov_far_apart_points():
    """Far apart points: the distance is the mass that has to move"""
    X = line(0, 10)
    assert metric.prohorov(X, [0.5, 0.5], [0.75, 0.25]) == \
        pytest.approx(0.25)


def test_prohorov_moves_the_missing_mass():
    """(1, 0) against (0.6, 0.4) one apart is 0.4"""
    X = line(0, 1)
    assert metric.prohorov(X, [1.0, 0.0], [0.6, 0.4]) == \
        pytest.approx(0.4, abs=1e-12)


def test_prohorov_is_symmetric():
    """d_P(mu, nu) = d_P(nu, mu) on random spaces"""
    rng = np.random.default_rng(2)
    for _ in range(10):
        X = line(*rng.uniform(0, 2, 5))
        mu = rng.multinomial(8, np.ones(5) / 5) / 8.0
        nu = rng.multinomial(8, np.ones(5) / 5) / 8.0
        forward = metric.prohorov(X, mu, nu)
        assert forward == metric.prohorov(X, nu, mu)
        assert 0.0 <= forward <= 1.0


def test_prohorov_checks_measures():
    with pytest.raises(DomainError):
        metric.prohorov(line(0, 1), [0.5, 0.4], [0.5, 0.5])
    with pytest.raises(DomainError):
        metric.prohorov(line(0, 1), [1.0], [1.0])


def test_isometry_from_identity():
    """An identity correspondence gives back the identity map"""
    X = line(0, 1, 2)
    f = metric.isometry_from_correspondence(X, X, [(0, 0), (1, 1), (2, 2)],
                                            1.0)
    assert f.tolist() == [0, 1, 2]

    with pytest.raises(DomainError):
        metric.isometry_from_correspondence(
            X, line(0, 2, 4), [(0, 0), (1, 1), (2, 2)], 1.0)


def test_isometry_from_correspondence_bounds():
    """dis(f) <= dis(R) + 2 eps and f(X) is a 3 eps-net of Y"""
    rng = np.random.default_rng(10)
    for _ in range(20):
        positions = rng.uniform(0, 3, 8)
        X = line(*positions)
        Y = line(*(positions + rng.uniform(-0.05, 0.05, 8)))
        R = [(i, i) for i in range(8)]
        epsilon = 0.3

        f = metric.isometry_from_correspondence(X, Y, R, epsilon)
        assert metric.map_distortion(X, Y, f) <= \
            metric.distortion(X, Y, R) + 2 * epsilon + 1e-12
        assert metric.cover_radius(Y, f) <= 3 * epsilon + 1e-12


def test_isometry_takes_the_first_listed_partner():
    """A net point related to several points maps to the first of them"""
    X = line(0, 1)
    R = [(0, 1), (0, 0), (1, 1)]
    f = metric.isometry_from_correspondence(X, X, R, 0.8)
    assert f.tolist() == [1, 1]

    # 2 falls in the ball of net point 0
    X = line(0, 1, 0.5)
    R = [(0, 0), (1, 1), (2, 2), (0, 2)]
    f = metric.isometry_from_correspondence(X, X, R, 0.6)
    assert f.tolist() == [0, 1, 0]


def test_pushforward_prohorov_check():
    """Pushing measures forward moves them apart by at most dis(f)"""
    rng = np.random.default_rng(14)
    for _ in range(10):
        positions = rng.uniform(0, 3, 6)
        X = line(*positions)
        Y = line(*(positions + rng.uniform(-0.1, 0.1, 6)))
        f = metric.isometry_from_correspondence(
            X, Y, [(i, i) for i in range(6)], 0.5)
        mu = rng.multinomial(4, np.ones(6) / 6) / 4.0
        nu = rng.multinomial(4, np.ones(6) / 6) / 4.0
        lhs, rhs = metric.pushforward_prohorov_check(X, Y, f, mu, nu)
        assert lhs <= rhs + 1e-12


def test_push():
    """Image measures add up the masses sent to the same point"""
    pushed = AtomicMeasure([0.25, 0.25, 0.5]).push([1, 1, 0], 3)
    assert pushed.masses.tolist() == [0.5, 0.5, 0.0]


def test_delta_ghwt_point_against_segment():
    """A point against a segment weighted at one end"""
    point = WeightedSpace([[0.0]], [1.0])
    segment = WeightedSpace([[0.0, 1.0], [1.0, 0.0]], [1.0, 0.0])

    bounds = metric.delta_ghwt(point, segment)
    assert bounds.exact
    assert bounds.lower == bounds.upper == pytest.approx(1.0)
    assert metric.d_ghwt_bounds(point, segment) == \
        pytest.approx((0.5, 1.0))


def test_delta_ghwt_sees_the_measure():
    """Same metric, different weights: the distance is positive"""
    even = WeightedSpace([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5])
    lopsided = WeightedSpace([[0.0, 1.0], [1.0, 0.0]], [1.0, 0.0])
    assert metric.gh(even, lopsided).upper == 0.0
    assert metric.delta_ghwt(even, lopsided).lower > 0
    assert metric.delta_ghwt(even, even).upper == 0.0


def test_delta_ghwt_ignores_relabelling_and_reflection():
    """Weight-preserving isometric copies are at distance zero"""
    rng = np.random.default_rng(6)
    for _ in range(10):
        tree = lib.random_tree(rng)
        points = [rtree.sample_length_point(tree, rng) for _ in range(4)]
        dist = rtree.distance_matrix(tree, points)
        dist = np.maximum(dist, dist.T)
        masses = rng.multinomial(8, np.ones(4) / 4) / 8.0
        order = rng.permutation(4)

        X = WeightedSpace(dist, masses)
        Y = WeightedSpace(dist[order][:, order], masses[order])
        bounds = metric.delta_ghwt(X, Y)
        assert bounds.exact
        assert bounds.upper == 0.0

    start = WeightedSpace(line(0, 0.5, 1).dist, [1.0, 0.0, 0.0])
    end = WeightedSpace(line(0, 0.5, 1).dist, [0.0, 0.0, 1.0])
    assert metric.delta_ghwt(start, end).upper == 0.0


def test_tree_to_space():
    """The space of a tree keeps its distances and its weight"""
    y = lib.y_tree()
    space = metric.tree_to_space(y, 1.0)

    assert space.measure.masses.sum() == pytest.approx(1.0)
    for leaf in (1, 2, 3):
        index = space.refs.index(PointRef.at(leaf))
        assert space.measure.masses[index] == pytest.approx(1.0 / 3)

    one, three = space.refs.index(PointRef.at(1)), \
        space.refs.index(PointRef.at(3))
    assert space.dist[one, three] == pytest.approx(4.0)
    assert space.diameter == pytest.approx(5.0)


def test_delta_ghwt_between_trees():
    """A tree is at distance zero from itself, an SPR moves it away"""
    y = lib.y_tree()
    X = metric.tree_to_space(y, 4.0)

    same = metric.delta_ghwt(X, X)
    assert same.upper == 0.0

    moved = rtree.spr(y, PointRef.on(0, 0.5), PointRef.at(3))
    bounds = metric.delta_ghwt(X, metric.tree_to_space(moved, 4.0))
    assert 0.0 <= bounds.lower <= bounds.upper
    assert bounds.upper > 0
