import math

import numpy as np
import pytest
from scipy import stats

from sprtree import sampler, settings, excursion, rtree
from sprtree.sampler import SamplerConfig
from sprtree.util import DomainError

from . import lib


def teardown_function(function):
    lib.clean()


def test_config_defaults_follow_settings():
    """Unset fields are read from settings when the config is made"""
    settings.Steps = 50
    cfg = SamplerConfig(weight_grid=8)
    assert cfg.steps == 50
    assert cfg.weight_grid == 8
    assert cfg.seed == settings.Seed
    assert cfg.method == "dyck"

    assert SamplerConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()


def test_config_rejects_bad_values():
    with pytest.raises(DomainError):
        SamplerConfig(method="walk")
    with pytest.raises(DomainError):
        SamplerConfig(steps=0)
    with pytest.raises(DomainError):
        SamplerConfig(weight_grid=0)


def test_smallest_dyck_path_is_a_tent():
    """One up and one down step"""
    e = sampler.dyck_excursion(1, rng=0)
    assert np.allclose(e.times, [0.0, 0.5, 1.0])
    assert np.allclose(e.values, [0.0, 1 / math.sqrt(2), 0.0])


def test_dyck_paths_live_on_the_lattice():
    """Heights are integers over sqrt(2n) at times k / 2n"""
    rng = np.random.default_rng(3)
    for n in (2, 5, 40):
        e = sampler.dyck_excursion(n, rng)
        assert e.length == 1.0
        assert not e.touching
        scaled = e.values * math.sqrt(2 * n)
        assert np.allclose(scaled, np.rint(scaled))
        assert np.allclose(e.times * 2 * n, np.rint(e.times * 2 * n))


def test_dyck_paths_are_uniform():
    """Both shapes of six steps come up about equally often"""
    rng = np.random.default_rng(4)
    tall = sum(sampler.dyck_excursion(3, rng).max > 2.5 / math.sqrt(6)
               for _ in range(2000))
    assert stats.binomtest(tall, 2000, 0.5).pvalue > 1e-3


def test_vervaat_excursions():
    """Bridges rotated at their minimum are excursions of unit length"""
    rng = np.random.default_rng(5)
    for _ in range(10):
        e = sampler.vervaat_excursion(30, rng)
        assert e.length == pytest.approx(1.0)
        assert not e.touching


def test_sample_excursion_is_reproducible():
    """The same seed gives the same path, another seed another path"""
    cfg = SamplerConfig(steps=100, seed=11)
    first = sampler.sample_excursion(cfg)
    assert first.allclose(sampler.sample_excursion(cfg))
    other = sampler.sample_excursion(SamplerConfig(steps=100, seed=12))
    assert not np.array_equal(first.values, other.values)

    cfg = SamplerConfig(steps=100, seed=11, method="bridge-vervaat")
    assert sampler.sample_excursion(cfg).allclose(
        sampler.sample_excursion(cfg))


def test_sample_crt():
    """The tree of 2e has height twice the maximum of e"""
    cfg = SamplerConfig(steps=200, weight_grid=16, seed=3)
    e = sampler.sample_excursion(cfg)
    tree = sampler.sample_crt(cfg)

    assert len(tree.atoms) == 16
    assert tree.masses.sum() == pytest.approx(1.0)
    assert rtree.height(tree) == pytest.approx(2 * e.max)


def test_tree_of_2e():
    """T_2e doubles every length and has diameter at most 4 max e"""
    cfg = SamplerConfig(steps=200, weight_grid=8)
    rng = np.random.default_rng(5)
    for _ in range(10):
        e = sampler.sample_excursion(cfg, rng)
        single = rtree.tree_from_excursion(e, 8)
        double = rtree.tree_from_excursion(excursion.dilate(e, 2.0), 8)

        assert rtree.diameter(double) <= 4 * e.max + 1e-12
        assert rtree.total_length(double) == \
            pytest.approx(2 * rtree.total_length(single), rel=1e-12)


def test_excursion_max_scales_like_the_limit():
    """Mean of max e is near sqrt(pi / 2) for a fine lattice"""
    cfg = SamplerConfig(steps=500)
    rng = np.random.default_rng(8)
    tops = [sampler.sample_excursion(cfg, rng).max for _ in range(400)]
    assert np.mean(tops) == pytest.approx(math.sqrt(math.pi / 2), abs=0.08)


def test_sample_gamma_point():
    """Gamma points lie under the graph with their straddle around them"""
    rng = np.random.default_rng(9)
    for _ in range(50):
        e = lib.random_excursion(rng)
        gp = sampler.sample_gamma_point(e, rng)
        assert gp.s_lo < gp.s < gp.s_hi
        assert 0 < gp.a <= e(gp.s) + 1e-12
        assert e(gp.s_lo) == pytest.approx(gp.a, abs=1e-9)
        assert e(gp.s_hi) == pytest.approx(gp.a, abs=1e-9)


def test_gamma_points_follow_length_on_the_tree():
    """Tree images of gamma points of the W-path split evenly over its legs"""
    w = lib.w_path()
    tree = rtree.tree_from_excursion(w, weight_grid=4)
    rng = np.random.default_rng(12)

    starts = [sampler.sample_gamma_point(w, rng).s_lo for _ in range(10000)]
    counts = np.bincount([ref.edge for ref in tree.contour.locate(starts)],
                         minlength=3)

    assert counts.sum() == 10000
    assert stats.chisquare(counts).pvalue > 0.01


def test_decompose():
    """Unit excursions above and below the point, with rho and u"""
    rng = np.random.default_rng(10)
    for _ in range(20):
        e = lib.random_excursion(rng)
        gp = sampler.sample_gamma_point(e, rng)
        if gp.width >= e.length - 1e-9:
            continue
        parts = sampler.decompose(e, gp)

        assert parts.rho == pytest.approx(gp.width / e.length)
        assert parts.e_hat_unit.length == pytest.approx(1.0)
        assert parts.e_check_unit.length == pytest.approx(1.0)
        assert 0 <= parts.u <= 1

        back = excursion.insert(parts.e_hat_unit, parts.e_check_unit,
                                parts.u, parts.rho)
        assert back.allclose(e, tol=1e-9)


def test_rho_cdf():
    """The truncated law runs from 0 at rho_min to 1 at 1"""
    assert sampler.rho_cdf(0.2, 0.2) == pytest.approx(0.0)
    assert sampler.rho_cdf(1.0, 0.2) == pytest.approx(1.0)
    assert sampler.rho_cdf(0.1, 0.2) == pytest.approx(0.0)
    values = sampler.rho_cdf(np.linspace(0.2, 1.0, 20), 0.2)
    assert np.all(np.diff(values) > 0)


def test_sample_rho_follows_its_law():
    """Draws from sample_rho pass a KS test against rho_cdf"""
    rng = np.random.default_rng(12)
    draws = [sampler.sample_rho(rng, 0.1) for _ in range(2000)]
    assert min(draws) >= 0.1
    assert stats.kstest(draws, lambda r: sampler.rho_cdf(r, 0.1)).pvalue \
        > 1e-3

    with pytest.raises(DomainError):
        sampler.sample_rho(rng, 0.0)


def test_symmetric_pair():
    """Both excursions have unit length and coincide when u = v"""
    cfg = SamplerConfig(steps=50)
    first, second = sampler.sample_symmetric_pair(0, cfg)
    assert first.length == pytest.approx(1.0)
    assert second.length == pytest.approx(1.0)

    first, second = sampler.sample_symmetric_pair(0, cfg, u=0.3, v=0.3)
    assert first.allclose(second)
