"""Requests behind the command-line interface

Each public method of `Service` answers one subcommand with
JSON-compatible documents or CSV text, leaving files to the caller.

"""

import logging
import dataclasses

from . import settings, util, metric, verify, dynamics, excursion
from .formats import formatting
from .rtree import WeightedTree, PointRef, tree_from_excursion
from .sampler import sample_crt, sample_excursion
from .util import DomainError, InputError

log = logging.getLogger("sprtree")

PATH_ACTIONS = ("excise", "insert", "spr", "straddle", "level-starts")
DIST_MODES = ("gh", "delta-ghwt", "d-ghwt")
VERIFY_TESTS = ("estimate", "distribution", "exchangeability",
                "cross-validation")


class Service(object):

    def __init__(self, threads=None):
        self.threads = settings.Threads if threads is None else threads

    def sample_crt(self, cfg, run=None):
        """Sampled excursion e and its tree T_{2e}

        Returns:
            dict with the tree document, the excursion CSV and Newick

        """

        rng = util.as_generator(cfg.seed)
        e = sample_excursion(cfg, rng)
        tree = _crt_of(e, cfg)
        log.info("Sampled %r with %s", tree, cfg)
        return {
            "tree": formatting.format_tree(tree, run),
            "excursion": formatting.format_excursion(e, run),
            "newick": formatting.format_newick(tree),
        }

    def chain(self, init, horizon, cfg, observables=None, snapshots=(),
              time_scale=None, run=None):
        """Run the SPR jump chain

        Arguments:
            init (str or dict): "crt" to start from a sampled tree, or a
                tree document
            horizon (float): Model time

        Returns:
            dict with trajectory CSV, snapshot and final tree documents

        """

        if init == "crt":
            first, rng = util.seed_streams(cfg.seed, 2)
            tree = sample_crt(cfg, first)
        else:
            tree = formatting.parse_tree(init)
            if not isinstance(tree, WeightedTree):
                raise InputError("The chain needs a weighted tree")
            rng = util.as_generator(cfg.seed)

        observables = observables or dynamics.DEFAULT_OBSERVABLES
        trajectory = dynamics.run_chain(tree, horizon, observables,
                                        snapshots, rng, time_scale)

        return {
            "trajectory": formatting.format_trajectory(trajectory, run),
            "snapshots": dict(
                (index, formatting.format_tree(snapshot, run))
                for index, snapshot in sorted(trajectory.snapshots.items())),
            "final": formatting.format_tree(trajectory.final, run),
        }

    def verify(self, test, cfg, id=None, params=None, samples=None,
               rho_min=None, run=None):
        """Run one verification and return its report document"""
        if test == "estimate":
            result = verify.mc_estimate(id, params, cfg, samples, self.threads)
        elif test == "distribution":
            result = verify.distribution_test(id, params, cfg, samples,
                                              self.threads)
        elif test == "exchangeability":
            result = verify.exchangeability_test(cfg, samples, self.threads,
                                                 rho_min)
        elif test == "cross-validation":
            result = verify.cross_validate(id, params, cfg, samples,
                                           self.threads)
        else:
            raise DomainError("Unknown test %r" % test)

        return formatting.format_report(test, result, run)

    def dist(self, a, b, mode, epsilon=None, run=None):
        """Bracket a distance between two tree documents"""
        if mode not in DIST_MODES:
            raise DomainError("Unknown mode %r, pick one of %s"
                              % (mode, ", ".join(DIST_MODES)))

        epsilon = settings.NetEpsilon if epsilon is None else epsilon
        trees = [formatting.parse_tree(doc) for doc in (a, b)]
        if mode != "gh" and not all(isinstance(t, WeightedTree)
                                    for t in trees):
            raise InputError("%s needs weighted trees" % mode)

        X, Y = [metric.tree_to_space(t, epsilon) if isinstance(t, WeightedTree)
                else _unweighted_space(t, epsilon) for t in trees]
        log.info("Comparing spaces of %d and %d points", len(X), len(Y))

        if mode == "gh":
            bounds = metric.gh(X, Y)
        elif mode == "delta-ghwt":
            bounds = metric.delta_ghwt(X, Y)
        else:
            lower, upper = metric.d_ghwt_bounds(X, Y)
            bounds = metric.Bounds(lower, upper, lower == upper, None)

        return formatting.format_bounds(bounds, mode, epsilon, run)

    def path(self, action, e, other=None, s=None, a=None, u=None, rho=None,
             v=None, run=None):
        """Excursion surgery on CSV paths

        Returns:
            dict of named outputs, CSV text for paths and documents
                for everything else

        """

        e = formatting.parse_excursion(e)

        if action == "straddle":
            gp = excursion.straddle(e, _required("s", s), _required("a", a))
            return {"straddle": dataclasses.asdict(gp)}

        if action == "level-starts":
            return {"level_starts": {
                "a": _required("a", a),
                "starts": excursion.level_starts(e, a),
            }}

        if action == "excise":
            gp = excursion.straddle(e, _required("s", s), _required("a", a))
            e_hat, e_check = excursion.excise(e, gp)
            return {
                "hat": formatting.format_excursion(e_hat, run),
                "check": formatting.format_excursion(e_check, run),
            }

        if action == "insert":
            if other is None:
                raise DomainError("insert needs a host excursion")
            host = formatting.parse_excursion(other)
            result = excursion.insert(e, host, _required("u", u),
                                      _required("rho", rho))
            return {"path": formatting.format_excursion(result, run)}

        if action == "spr":
            gp = excursion.straddle(e, _required("s", s), _required("a", a))
            result = excursion.path_spr(e, gp, _required("v", v))
            return {"path": formatting.format_excursion(result, run)}

        raise DomainError("Unknown action %r, pick one of %s"
                          % (action, ", ".join(PATH_ACTIONS)))

    def _dispatch(self, method, params):
        """Customise exception handling"""
        func = getattr(self, method.replace("-", "_"))
        try:
            return func(**params)
        except (DomainError, InputError, OSError):
            raise
        except Exception:
            log.exception("%s failed", method)
            raise


def _crt_of(e, cfg):
    return tree_from_excursion(excursion.dilate(e, 2.0), cfg.weight_grid)


def _unweighted_space(tree, epsilon):
    """Metric space of an unweighted tree, for Gromov-Hausdorff queries"""
    atoms = [(ref, 1.0 / len(tree.vertices)) for ref in
             (PointRef.at(v) for v in tree.vertices)]
    weighted = WeightedTree(tree.edges, atoms, tree.vertices, tree.root,
                            validate=False)
    return metric.tree_to_space(weighted, epsilon)


def _required(name, value):
    if value is None:
        raise DomainError("Missing parameter %r" % name)
    return float(value)
