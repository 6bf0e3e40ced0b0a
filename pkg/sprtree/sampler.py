"""Random excursions, continuum random trees and their decompositions"""

import math
import logging
import collections

import numpy as np

from . import settings
from .excursion import (
    Excursion, straddle, excise, insert, rescale, dilate)
from .rtree import tree_from_excursion
from .util import DomainError, as_generator

log = logging.getLogger("sprtree")

METHODS = ("dyck", "bridge-vervaat")

Decomposition = collections.namedtuple(
    "Decomposition", ["rho", "e_hat_unit", "e_check_unit", "u"])


class SamplerConfig(object):
    """Lattice resolution, weight grid, seed and method of a sampler

    Unset fields fall back to `settings`.

    """

    def __init__(self, steps=None, weight_grid=None, seed=None, method=None):
        self.steps = settings.Steps if steps is None else int(steps)
        self.weight_grid = settings.WeightGrid if weight_grid is None \
            else int(weight_grid)
        self.seed = settings.Seed if seed is None else int(seed)
        self.method = settings.Method if method is None else method

        if self.steps < 1:
            raise DomainError("steps must be at least 1, got %r" % self.steps)
        if self.weight_grid < 1:
            raise DomainError("weight_grid must be at least 1, got %r"
                              % self.weight_grid)
        if self.method not in METHODS:
            raise DomainError("Unknown method %r, pick one of %s"
                              % (self.method, ", ".join(METHODS)))

    def __repr__(self):
        return "SamplerConfig(%s)" % ", ".join(
            "%s=%r" % item for item in sorted(self.to_dict().items()))

    def to_dict(self):
        return {
            "steps": self.steps,
            "weight_grid": self.weight_grid,
            "seed": self.seed,
            "method": self.method,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def dyck_excursion(n, rng=None):
    """Uniform lattice excursion of 2n steps, scaled to unit length

    A shuffled sequence of n - 1 up and n down steps is rotated to start
    right after its first minimum (cycle lemma), giving a uniform Dyck
    path of 2n - 2 steps once the final down step is dropped. One extra
    up and down step keep the interior strictly positive.

    """

    rng = as_generator(rng)
    steps = np.array([1] * (n - 1) + [-1] * n)
    rng.shuffle(steps)
    first_min = int(np.argmin(np.cumsum(steps)))
    dyck = np.roll(steps, -(first_min + 1))[:-1]

    heights = np.concatenate(([0], np.cumsum(np.concatenate(([1], dyck, [-1])))))
    times = np.arange(2 * n + 1) / (2.0 * n)
    return Excursion(times, heights / math.sqrt(2.0 * n))


def vervaat_excursion(n, rng=None):
    """Gaussian bridge on a 2n grid rotated at its minimum"""
    rng = as_generator(rng)
    size = 2 * n
    grid = np.arange(size + 1) / float(size)

    while True:
        walk = np.concatenate(([0.0], np.cumsum(
            rng.normal(0.0, math.sqrt(1.0 / size), size))))
        bridge = walk - grid * walk[-1]
        low = int(np.argmin(bridge[:-1]))
        values = np.concatenate((bridge[low:-1], bridge[:low + 1])) - \
            bridge[low]
        if np.all(values[1:-1] > 0):
            return Excursion(grid, values)
        log.debug("Bridge touched its minimum twice, redrawing")


def sample_excursion(cfg=None, rng=None):
    """Approximate standard Brownian excursion of unit length"""
    cfg = cfg or SamplerConfig()
    rng = as_generator(rng if rng is not None else cfg.seed)
    if cfg.method == "dyck":
        return dyck_excursion(cfg.steps, rng)
    return vervaat_excursion(cfg.steps, rng)


def sample_crt(cfg=None, rng=None):
    """Weighted tree T_{2e} for a sampled excursion e"""
    cfg = cfg or SamplerConfig()
    e = sample_excursion(cfg, rng)
    return tree_from_excursion(dilate(e, 2.0), cfg.weight_grid)


def sample_gamma_point(e, rng=None):
    """Point of Gamma_e drawn with density 1 / (s_hi - s_lo)

    A tree point is drawn from length measure as a level crossing on an
    ascending segment; the time is then uniform over the excursion above
    that level which starts there.

    """

    rng = as_generator(rng)
    t, v = e.times, e.values
    rise = np.clip(np.diff(v), 0.0, None)
    if not rise.sum() > 0:
        raise DomainError("Degenerate excursion")

    while True:
        i = int(rng.choice(len(rise), p=rise / rise.sum()))
        a = v[i] + (1.0 - rng.random()) * rise[i]
        start = t[i] + (a - v[i]) * (t[i + 1] - t[i]) / rise[i]
        if not 0 < start < e.length:
            continue
        above = straddle(e, start, a)
        if above.width <= 0:
            continue
        s = above.s_lo + rng.random() * above.width
        if above.s_lo < s < above.s_hi:
            return straddle(e, s, a)


def decompose(e, gp):
    """Split `e` at a gamma point into unit excursions, length and position

    Returns:
        Decomposition(rho, e_hat_unit, e_check_unit, u) with rho the
            relative length of the excursion above the point and u the
            relative position of the cut in the remainder

    """

    e_hat, e_check = excise(e, gp)
    rho = e_hat.length / e.length
    return Decomposition(
        rho,
        rescale(e_hat, 1.0 / e_hat.length),
        rescale(e_check, 1.0 / e_check.length),
        gp.s_lo / e_check.length,
    )


def rho_cdf(rho, rho_min):
    """Distribution function of rho, density prop. to ((1-rho) rho^3)^-1/2

    Restricted to [rho_min, 1], using the antiderivative
    -2 sqrt((1 - rho) / rho).

    """

    rho = np.clip(np.asarray(rho, dtype=float), rho_min, 1.0)
    return 1.0 - np.sqrt((1.0 - rho) / rho) / \
        math.sqrt((1.0 - rho_min) / rho_min)


def sample_rho(rng=None, rho_min=None):
    """rho from the truncated density, by inverting `rho_cdf`"""
    rng = as_generator(rng)
    rho_min = settings.RhoMin if rho_min is None else rho_min
    if not 0 < rho_min < 1:
        raise DomainError("rho_min must lie in (0, 1), got %r" % rho_min)

    q = (1.0 - rng.random()) * math.sqrt((1.0 - rho_min) / rho_min)
    return 1.0 / (1.0 + q * q)


def sample_symmetric_pair(rng=None, cfg=None, rho_min=None, u=None, v=None):
    """Two excursions built from the same pieces at two positions

    Draws e', e'' independently, u, v uniform and rho from the truncated
    density, and returns the insertions of e' into e'' at u and at v.

    Arguments:
        rng (optional): Generator or seed
        cfg (SamplerConfig, optional): Sampler for e' and e''
        rho_min (float, optional): Truncation, `settings.RhoMin` by default
        u, v (float, optional): Fix the insertion positions

    """

    rng = as_generator(rng)
    cfg = cfg or SamplerConfig()

    first = sample_excursion(cfg, rng)
    second = sample_excursion(cfg, rng)
    u = rng.random() if u is None else u
    v = rng.random() if v is None else v
    rho = sample_rho(rng, rho_min)

    return insert(first, second, u, rho), insert(first, second, v, rho)
