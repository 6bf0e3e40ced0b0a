"""Desk-scale Monte Carlo acceptance runs

These take minutes and only run with SPRTREE_ACCEPTANCE=1.

"""

import os
import math
import itertools

import numpy as np
import pytest

from sprtree import verify, metric, rtree, dynamics, sampler, excursion
from sprtree.metric import WeightedSpace
from sprtree.sampler import SamplerConfig

from . import lib

pytestmark = pytest.mark.skipif(
    not os.getenv("SPRTREE_ACCEPTANCE"),
    reason="set SPRTREE_ACCEPTANCE=1 to run acceptance tests")

THREADS = os.cpu_count() or 1


def test_excursion_max_law():
    cfg = SamplerConfig(steps=1000, seed=7)
    report = verify.mc_estimate("excursion_max_tail", {"x": 1.0}, cfg,
                                samples=50000, threads=THREADS)
    assert report.estimate == pytest.approx(0.82208, abs=0.015)


@pytest.mark.parametrize("id, params, samples, tolerance", [
    ("mass_tail_mean", {"p": 0.5}, 20000, 0.05),
    ("mass_beta_mean", {"beta": 1.0}, 20000, 0.05),
    ("trim_length_mean", {"x": 1.0}, 20000, 0.05),
    ("height_alpha_mean", {"alpha": 2.0}, 40000, 0.07),
])
def test_subtree_functionals(id, params, samples, tolerance):
    cfg = SamplerConfig(steps=1000, weight_grid=512, seed=7)
    report = verify.mc_estimate(id, params, cfg, samples=samples,
                                threads=THREADS)
    assert abs(report.estimate - report.theory) <= \
        tolerance * report.theory
    assert report.verdict, report


def test_decomposition_laws():
    cfg = SamplerConfig(steps=1000, weight_grid=8, seed=7)
    report = verify.distribution_test(params={"p0": 0.2}, cfg=cfg,
                                      samples=40000,
                                      threads=THREADS, minimum=5000)
    for name in ("rho", "u", "independence"):
        assert report.pvalues[name] > 0.01, report.pvalues
    assert report.controls["dependent"] < 0.01


def _random_space(rng, size):
    points = rng.uniform(0, 2, (size, 2))
    dist = np.abs(points[:, None, :] - points[None, :, :]).sum(axis=2)
    masses = rng.multinomial(8, np.ones(size) / size) / 8.0
    return WeightedSpace(dist, masses)


def test_prohorov_is_a_metric():
    rng = np.random.default_rng(1)
    for _ in range(200):
        X = _random_space(rng, 4)
        mu, nu, la = (rng.multinomial(8, np.ones(4) / 4) / 8.0
                      for _ in range(3))
        assert metric.prohorov(X, mu, mu) == 0.0
        assert metric.prohorov(X, mu, nu) == \
            pytest.approx(metric.prohorov(X, nu, mu), abs=1e-12)
        assert metric.prohorov(X, mu, la) <= \
            metric.prohorov(X, mu, nu) + metric.prohorov(X, nu, la) + 1e-12

        Y = _random_space(rng, 4)
        f = rng.integers(4, size=4)
        metric.pushforward_prohorov_check(X, Y, f, mu, nu)


def test_relaxed_triangle_inequality():
    rng = np.random.default_rng(2)
    for _ in range(50):
        X, Y, Z = (_random_space(rng, int(rng.integers(1, 5)))
                   for _ in range(3))
        xy = metric.delta_ghwt(X, Y)
        yz = metric.delta_ghwt(Y, Z)
        xz = metric.delta_ghwt(X, Z)
        assert xy.exact and yz.exact and xz.exact
        assert xz.upper <= 2 * (xy.upper + yz.upper) + 1e-9


def test_chain_inequality():
    rng = np.random.default_rng(3)
    for _ in range(20):
        chain = [_random_space(rng, int(rng.integers(1, 5)))
                 for _ in range(int(rng.integers(2, 6)))]
        links = sum(metric.delta_ghwt(a, b).upper ** 0.25
                    for a, b in zip(chain, chain[1:]))
        assert metric.delta_ghwt(chain[0], chain[-1]).upper ** 0.25 <= \
            2 * links + 1e-9


def test_net_cardinality_bound():
    rng = np.random.default_rng(4)
    for _ in range(100):
        tree = lib.random_tree(rng)
        for epsilon in (0.1, 0.5, 2.0):
            assert len(rtree.eps_net(tree, epsilon)) <= \
                rtree.eps_net_bound(tree, epsilon)


def test_spr_conserves_length_and_mass():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        tree = lib.random_tree(rng)
        moved = rtree.spr(tree, rtree.sample_length_point(tree, rng),
                          rtree.sample_weight_point(tree, rng))
        assert abs(rtree.total_length(moved) - rtree.total_length(tree)) \
            <= 1e-12
        assert abs(math.fsum(moved.masses) - 1.0) <= 1e-12


def test_spr_distance_cases():
    """Every pair of vertices, atoms and length points follows the SPR law"""
    rng = np.random.default_rng(7)
    for _ in range(1000):
        tree = lib.random_tree(rng)
        u = rtree.sample_length_point(tree, rng)
        v = rtree.sample_weight_point(tree, rng)
        points = [rtree.PointRef.at(vertex) for vertex in tree.vertices]
        points += [atom.at for atom in tree.atoms]
        points += [rtree.sample_length_point(tree, rng) for _ in range(6)]
        assert lib.spr_case_law_error(tree, u, v, points) <= 1e-10


def test_excise_insert_round_trip():
    rng = np.random.default_rng(8)
    for _ in range(1000):
        e = lib.random_excursion(rng)
        gp = sampler.sample_gamma_point(e, rng)
        if gp.width >= e.length:
            continue
        parts = sampler.decompose(e, gp)
        back = excursion.insert(parts.e_hat_unit, parts.e_check_unit,
                                parts.u, parts.rho)
        assert back.allclose(e, tol=1e-12)


def test_path_and_tree_spr_commute():
    rng = np.random.default_rng(9)
    checked = 0
    while checked < 1000:
        e = lib.random_excursion(rng)
        cut = lib.random_cut(rng, e)
        if cut is None:
            continue
        gp, v = cut
        times = rng.uniform(0.0, 1.0, 8)
        assert lib.commutation_error(e, gp, v, times) <= 1e-9
        checked += 1


@pytest.mark.parametrize("n", [4, 5])
def test_discrete_chain_is_symmetric(n):
    array = dynamics.as_array(dynamics.transition_matrix(n))
    assert np.max(np.abs(array - array.T)) <= 1e-14


def test_discrete_chain_occupation():
    steps = 100000
    counts = dynamics.occupation(4, steps, rng=6)
    # Off-diagonal moves of 1/10 leave a second eigenvalue of 0.7
    inflation = (1 + 0.7) / (1 - 0.7)
    sigma = math.sqrt(inflation * (1 / 3.0) * (2 / 3.0) / steps)
    for key, count in counts.items():
        assert abs(count / float(steps) - 1 / 3.0) <= 3 * sigma, key


def test_exchangeability():
    cfg = SamplerConfig(steps=1000, weight_grid=64, seed=7)
    result = verify.exchangeability_test(cfg, samples=10000,
                                         threads=THREADS)
    for name, p in result["pvalues"].items():
        assert p > 0.01, name


def test_metric_reference_value():
    point = WeightedSpace([[0.0]], [1.0])
    segment = WeightedSpace([[0.0, 1.0], [1.0, 0.0]], [1.0, 0.0])
    assert metric.delta_ghwt(point, segment).upper == 1.0

    for a, b in itertools.combinations([point, segment], 2):
        assert metric.delta_ghwt(a, b).exact
