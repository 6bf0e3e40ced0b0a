"""Closed forms of the excursion and CRT functionals, and their Monte Carlo checks

Attributes:
    FORMULAS: Registry of closed forms, keyed by id

"""

import math
import logging
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import special, integrate, stats

from . import settings, util
from .excursion import dilate, excursions_above
from .rtree import tree_from_excursion, edge_functional, mean_dist
from .sampler import (
    SamplerConfig, sample_excursion, sample_gamma_point, decompose,
    sample_symmetric_pair, rho_cdf)
from .util import DomainError

log = logging.getLogger("sprtree")

SERIES_TOLERANCE = 1e-14
SERIES_TERMS = 10 ** 7


def _series(term, x):
    """Sum term(n) over n >= 1 until past the peak and below tolerance

    Raises:
        DomainError if the terms have not settled after SERIES_TERMS

    """

    total = 0.0
    for n in range(1, SERIES_TERMS + 1):
        value = term(n)
        total += value
        if n * x >= 1 and abs(value) <= SERIES_TOLERANCE * abs(total):
            return total
    raise DomainError("Series at x=%r did not settle within %d terms"
                      % (x, SERIES_TERMS))


def excursion_max_tail(x):
    """P(max e > x) for the standard excursion"""
    return _series(lambda n: 2.0 * (4.0 * n * n * x * x - 1.0) *
                   math.exp(-2.0 * n * n * x * x), x)


def straddle_height_tail(x):
    return _series(lambda n: 2.0 * n * x * math.exp(-2.0 * n * n * x * x), x)


def straddle_length_tail(p):
    return math.sqrt((1.0 - p) / (2.0 * math.pi * p))


def trim_length_mean(x):
    return _series(lambda n: 2.0 * n * x * math.exp(-n * n * x * x / 2.0),
                   x / 2.0)


def height_alpha_mean(alpha):
    return 2.0 ** ((alpha + 1.0) / 2.0) * alpha * \
        special.gamma((alpha + 1.0) / 2.0) * special.zeta(alpha, 1)


def mass_tail_mean(p):
    return math.sqrt(2.0 * (1.0 - p) / (math.pi * p))


def mass_beta_mean(beta):
    return 2.0 ** -0.5 * special.gamma(beta - 0.5) / special.gamma(beta)


def rho_density_norm(p0):
    """Mass of d rho / sqrt((1 - rho) rho^3) on [p0, 1], by quadrature"""
    value, _ = integrate.quad(lambda rho: rho ** -1.5, p0, 1.0,
                              weight="alg", wvar=(0.0, -0.5))
    return value


class Formula(object):
    """A closed form with its parameter and Monte Carlo functional

    Arguments:
        id (str): Registry key
        func (callable): Closed form of one parameter
        param (str): Parameter name
        domain (callable): Parameter check
        tree (str, optional): "e" or "2e", the tree the functional lives on,
            None for excursion-level or unsampled formulas
        functional (tuple, optional): (kind, rooted) of `edge_functional`

    """

    def __init__(self, id, func, param, domain, tree=None, functional=None):
        self.id = id
        self.func = func
        self.param = param
        self.domain = domain
        self.tree = tree
        self.functional = functional

    def __repr__(self):
        return "Formula(%r)" % self.id

    def __call__(self, value):
        if not self.domain(value):
            raise DomainError("%s: %s=%r outside its domain"
                              % (self.id, self.param, value))
        return float(self.func(value))


FORMULAS = util.ItemList("id", [
    Formula("excursion_max_tail", excursion_max_tail, "x",
            lambda x: x > 0),
    Formula("straddle_height_tail", straddle_height_tail, "x",
            lambda x: x > 0, "e", ("height_tail", True)),
    Formula("straddle_length_tail", straddle_length_tail, "p",
            lambda p: 0 < p <= 1, "e", ("mass_tail", True)),
    Formula("trim_length_mean", trim_length_mean, "x",
            lambda x: x > 0, "2e", ("height_tail", False)),
    Formula("height_alpha_mean", height_alpha_mean, "alpha",
            lambda a: a > 1, "2e", ("height_power", False)),
    Formula("mass_tail_mean", mass_tail_mean, "p",
            lambda p: 0 < p <= 1, "2e", ("mass_tail", False)),
    Formula("mass_beta_mean", mass_beta_mean, "beta",
            lambda b: b > 0.5, "2e", ("mass_power", False)),
    Formula("rho_density_norm", rho_density_norm, "p0",
            lambda p: 0 < p < 1),
])


def _formula(id):
    try:
        return FORMULAS[id]
    except KeyError:
        raise DomainError("Unknown formula %r, pick one of %s"
                          % (id, ", ".join(FORMULAS.keys())))


def _param(formula, params):
    params = dict(params or {})
    if formula.param not in params:
        raise DomainError("%s needs parameter %r" % (formula.id, formula.param))
    return float(params[formula.param])


def closed_form(id, params=None, **kwargs):
    """Evaluate a registered closed form

    Example:
        >>> round(closed_form("mass_beta_mean", beta=1), 7)
        1.2533141

    """

    formula = _formula(id)
    params = dict(params or {}, **kwargs)
    return formula(_param(formula, params))


@dataclass
class EstimateReport(object):
    """Monte Carlo estimate of a closed form"""

    id: str
    params: dict
    estimate: float
    std_error: float
    n_samples: int
    sampler: dict
    theory: float
    z_score: float
    verdict: bool
    threshold: float
    runtime: float = field(default=0.0, compare=False)

    def to_dict(self):
        """Serialisable fields; runtime stays out of written reports"""
        data = asdict(self)
        data.pop("runtime")
        return data


def _functional_sample(formula, value, cfg, rng):
    e = sample_excursion(cfg, rng)
    if formula.tree is None:
        return float(e.max > value)

    tree = tree_from_excursion(e if formula.tree == "e" else dilate(e, 2.0),
                               cfg.weight_grid)
    kind, rooted = formula.functional
    return edge_functional(tree, kind, value, rooted=rooted)


def _functional_chunk(job):
    id, value, cfg, size, rng = job
    formula = FORMULAS[id]
    cfg = SamplerConfig.from_dict(cfg)
    return [_functional_sample(formula, value, cfg, rng) for _ in range(size)]


def _ensemble(worker, samples, cfg, extra, threads):
    """Run `worker` over chunks with one seed stream per chunk"""
    samples = settings.Samples if samples is None else int(samples)
    if samples < 1:
        raise DomainError("Need at least one sample")

    sizes = util.chunked(samples, settings.ChunkSize)
    streams = util.seed_streams(cfg.seed, len(sizes))
    jobs = [extra + (cfg.to_dict(), size, rng)
            for size, rng in zip(sizes, streams)]

    threads = settings.Threads if threads is None else threads
    results = util.parallel(worker, jobs, threads)
    return [value for chunk in results for value in chunk]


def mc_estimate(id, params=None, cfg=None, samples=None, threads=None,
                threshold=None):
    """Monte Carlo estimate of a closed form over sampled trees

    The inner integral over the tree is exact (`edge_functional`); only
    the trees are random.

    Arguments:
        id (str): Formula id
        params (dict): Formula parameter, e.g. {"p": 0.5}
        cfg (SamplerConfig, optional): Sampler
        samples (int, optional): Trees, `settings.Samples` by default
        threads (int, optional): Parallel workers
        threshold (float, optional): |z| accepted, `settings.ZThreshold`

    Returns:
        EstimateReport

    """

    formula = _formula(id)
    value = _param(formula, params)
    theory = formula(value)
    if formula.id == "rho_density_norm":
        raise DomainError("rho_density_norm has no Monte Carlo estimator")

    cfg = cfg or SamplerConfig()
    threshold = settings.ZThreshold if threshold is None else threshold

    with util.Timer("%s took %%.3f s" % id) as timer:
        values = _ensemble(_functional_chunk, samples, cfg,
                           (id, value), threads)

    estimate, error = util.stable_mean(values)
    if error > 0:
        z = (estimate - theory) / error
    else:
        z = 0.0 if estimate == theory else math.copysign(math.inf,
                                                         estimate - theory)

    report = EstimateReport(
        id=id,
        params={formula.param: value},
        estimate=estimate,
        std_error=error,
        n_samples=len(values),
        sampler=cfg.to_dict(),
        theory=theory,
        z_score=z,
        verdict=bool(abs(z) <= threshold),
        threshold=threshold,
        runtime=timer.elapsed,
    )

    log.info("%s: estimate %.6f +- %.6f, theory %.6f, z %.2f",
             id, estimate, error, theory, z)
    return report


def bias_allowance(report_n, report_2n, rate=0.5):
    """Richardson estimate of the lattice bias left at resolution 2n

    With estimate(n) = theta + c n^-rate the bias at 2n is
    (estimate(n) - estimate(2n)) / (2^rate - 1).

    Returns:
        (allowance, extrapolated)

    """

    shift = (report_n.estimate - report_2n.estimate) / (2.0 ** rate - 1.0)
    return abs(shift), report_2n.estimate - shift


def cross_validate(id, params=None, cfg=None, samples=None, threads=None):
    """Compare both samplers at resolutions n and 2n

    Returns:
        dict with the four reports, the pairwise agreement within
            combined 3 sigma and, per method, whether the finer
            resolution moved toward theory

    """

    cfg = cfg or SamplerConfig()
    reports = {}
    for method in ("dyck", "bridge-vervaat"):
        for steps in (cfg.steps, 2 * cfg.steps):
            run = SamplerConfig(steps, cfg.weight_grid, cfg.seed, method)
            reports["%s/%d" % (method, steps)] = mc_estimate(
                id, params, run, samples, threads)

    keys = sorted(reports)
    agreement = {}
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            ra, rb = reports[a], reports[b]
            sigma = math.hypot(ra.std_error, rb.std_error)
            agreement["%s~%s" % (a, b)] = bool(
                abs(ra.estimate - rb.estimate) <= 3.0 * sigma)

    toward = {}
    allowance = {}
    for method in ("dyck", "bridge-vervaat"):
        coarse = reports["%s/%d" % (method, cfg.steps)]
        fine = reports["%s/%d" % (method, 2 * cfg.steps)]
        toward[method] = bool(abs(fine.estimate - fine.theory) <=
                              abs(coarse.estimate - coarse.theory))
        allowance[method] = bias_allowance(coarse, fine)[0]

    return {
        "reports": dict((k, r.to_dict()) for k, r in reports.items()),
        "agreement": agreement,
        "toward_theory": toward,
        "bias_allowance": allowance,
    }


def weighted_ks(values, weights, cdf):
    """Kolmogorov-Smirnov statistic of a weighted sample

    Returns:
        (statistic, pvalue, n_eff) with the p-value taken at the effective
            sample size (sum w)^2 / sum w^2

    """

    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    order = np.argsort(values, kind="stable")
    values, weights = values[order], weights[order]

    total = weights.sum()
    upper = np.cumsum(weights) / total
    lower = upper - weights / total
    theory = cdf(values)
    statistic = float(max(np.max(upper - theory), np.max(theory - lower)))

    n_eff = total ** 2 / np.sum(weights ** 2)
    pvalue = float(stats.kstwo.sf(statistic, max(1, int(round(n_eff)))))
    return statistic, pvalue, float(n_eff)


def weighted_independence(first, second, weights, bins=4):
    """Chi-square test of independence on quantile bins, weights scaled to n_eff"""
    weights = np.asarray(weights, dtype=float)
    n_eff = weights.sum() ** 2 / np.sum(weights ** 2)

    def binned(values):
        edges = np.quantile(values, np.linspace(0, 1, bins + 1)[1:-1])
        return np.searchsorted(edges, values, side="right")

    table = np.zeros((bins, bins))
    np.add.at(table, (binned(first), binned(second)), weights)
    table *= n_eff / weights.sum()
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if min(table.shape) < 2:
        return 1.0
    return float(stats.chi2_contingency(table)[1])


def max_law_cdf(x):
    """P(max e <= x), vectorised"""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(len(x))
    positive = x > 0
    out[positive] = [1.0 - excursion_max_tail(v) for v in x[positive]]
    return np.clip(out, 0.0, 1.0)


def _decomposition_chunk(job):
    cfg, size, rng = job
    cfg = SamplerConfig.from_dict(cfg)
    rows = []
    for _ in range(size):
        e = sample_excursion(cfg, rng)
        gp = sample_gamma_point(e, rng)
        parts = decompose(e, gp)
        rise = float(np.sum(np.clip(np.diff(e.values), 0.0, None)))
        rows.append((parts.rho, parts.u, parts.e_hat_unit.max, rise))
    return rows


# Checks of the decomposition at a gamma point, by id
DISTRIBUTION_CHECKS = ("rho", "u", "independence", "max_law")


@dataclass
class DistributionReport(object):
    """p-values of the decomposition tests and their controls"""

    id: str
    params: dict
    sampler: dict
    n_samples: int
    qualifying: int
    n_eff: float
    pvalues: dict
    controls: dict
    runtime: float = field(default=0.0, compare=False)

    def to_dict(self):
        data = asdict(self)
        data.pop("runtime")
        return data


def distribution_test(id=None, params=None, cfg=None, samples=None,
                      threads=None, rng=None, minimum=500):
    """Test the decomposition at a gamma point against its laws

    Draws (e, gamma point), keeps rho >= p0 with importance weight the
    total length of T_e, and returns p-values of
        rho: KS against the truncated rho law
        u: KS against Uniform[0, 1]
        independence: chi-square between rho and max of the unit
            excursion above the point
        max_law: KS of that maximum against the excursion max law
    along with controls on the independence test, a shuffled pairing
    expected to pass and a dependent pairing expected to fail.

    Arguments:
        id (str, optional): One of DISTRIBUTION_CHECKS to report alone,
            all of them when None

    Raises:
        DomainError with fewer than `minimum` qualifying samples

    """

    if id is not None and id not in DISTRIBUTION_CHECKS:
        raise DomainError("Unknown check %r, pick one of %s"
                          % (id, ", ".join(DISTRIBUTION_CHECKS)))
    p0 = float(dict(params or {}).get("p0", 0.2))
    if not 0 < p0 < 1:
        raise DomainError("p0 must lie in (0, 1), got %r" % p0)
    cfg = cfg or SamplerConfig()

    with util.Timer("distribution test took %.3f s") as timer:
        rows = np.array(_ensemble(_decomposition_chunk, samples, cfg, (),
                                  threads))

    rho, u, top, weight = rows.T
    keep = rho >= p0
    if keep.sum() < minimum:
        raise DomainError("Only %d samples with rho >= %r, need %d"
                          % (keep.sum(), p0, minimum))
    rho, u, top, weight = rho[keep], u[keep], top[keep], weight[keep]

    _, p_rho, n_eff = weighted_ks(rho, weight, lambda r: rho_cdf(r, p0))
    _, p_u, _ = weighted_ks(u, weight, lambda v: np.clip(v, 0.0, 1.0))
    _, p_max, _ = weighted_ks(top, weight, max_law_cdf)
    p_ind = weighted_independence(rho, top, weight)

    control = util.as_generator(rng if rng is not None else cfg.seed + 1)
    shuffled = weighted_independence(rho, control.permutation(top), weight)
    noise = rho.std() * 0.1 * control.standard_normal(len(rho))
    dependent = weighted_independence(rho, rho + noise, weight)

    pvalues = {"rho": p_rho, "u": p_u, "independence": p_ind,
               "max_law": p_max}
    if id is not None:
        pvalues = {id: pvalues[id]}

    report = DistributionReport(
        id=id or "all",
        params={"p0": p0},
        sampler=cfg.to_dict(),
        n_samples=len(rows),
        qualifying=int(keep.sum()),
        n_eff=n_eff,
        pvalues=pvalues,
        controls={"shuffled": shuffled, "dependent": dependent},
        runtime=timer.elapsed,
    )
    log.info("distribution test: %r", report.pvalues)
    return report


def _largest_half_excursion(e):
    intervals = excursions_above(e, e.max / 2.0)
    return max(end - start for start, end in intervals)


def _pair_chunk(job):
    rho_min, force, cfg, size, rng = job
    cfg = SamplerConfig.from_dict(cfg)
    rows = []
    for _ in range(size):
        u = rng.random() if force else None
        first, second = sample_symmetric_pair(rng, cfg, rho_min, u,
                                              u if force else None)
        trees = [tree_from_excursion(dilate(e, 2.0), cfg.weight_grid)
                 for e in (first, second)]
        rows.append((
            first.max - second.max,
            mean_dist(trees[0]) - mean_dist(trees[1]),
            _largest_half_excursion(first) - _largest_half_excursion(second),
        ))
    return rows


def sign_test(differences):
    """Two-sided sign test of a symmetric difference, zeros dropped"""
    differences = np.asarray(differences, dtype=float)
    nonzero = differences[differences != 0]
    if not len(nonzero):
        return 1.0
    return float(stats.binomtest(int(np.sum(nonzero > 0)), len(nonzero),
                                 0.5).pvalue)


def exchangeability_test(cfg=None, samples=None, threads=None,
                         rho_min=None, force_equal=False):
    """Sign tests on g(first) - g(second) over symmetric pairs

    g is the maximum, the mean distance of T_{2e} and the length of the
    longest excursion above half the maximum.

    Returns:
        dict of p-values with the run parameters

    """

    cfg = cfg or SamplerConfig()
    rho_min = settings.RhoMin if rho_min is None else rho_min

    with util.Timer("exchangeability test took %.3f s"):
        rows = np.array(_ensemble(_pair_chunk, samples, cfg,
                                  (rho_min, bool(force_equal)), threads))

    names = ("max", "mean_dist", "half_max_excursion")
    pvalues = dict((name, sign_test(rows[:, i]))
                   for i, name in enumerate(names))

    log.info("exchangeability: %r", pvalues)
    return {
        "sampler": cfg.to_dict(),
        "rho_min": rho_min,
        "n_samples": len(rows),
        "pvalues": pvalues,
        "identical": bool(np.all(rows == 0)),
    }
