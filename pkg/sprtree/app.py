"""Application entry-point"""

import os
import sys
import logging
import argparse

from . import settings
from .version import version
from .formats import formatting
from .sampler import METHODS, SamplerConfig
from .service import Service, PATH_ACTIONS, DIST_MODES, VERIFY_TESTS
from .util import DomainError, InputError
from .verify import FORMULAS, DISTRIBUTION_CHECKS

log = logging.getLogger("sprtree")

# Flags naming output files, left out of the recorded config
OUTPUTS = ("out", "json", "excursion", "newick", "snapshot_dir", "final",
           "hat", "check")

OBSERVABLE_NAMES = {
    "mean-dist": "mean_dist",
    "height": "height",
    "diameter": "diameter",
    "total-length": "total_length",
    "trimmed-length": "trimmed_length",
}


class RunConfig(object):
    """Parsed subcommand with its flags, sampler and seed

    Arguments:
        args (argparse.Namespace): Parsed command line

    """

    def __init__(self, args):
        self.subcommand = args.command
        self.threads = args.threads
        self.sampler = SamplerConfig(
            getattr(args, "steps", None),
            getattr(args, "weight_grid", None),
            args.seed,
            getattr(args, "method", None),
        )
        self.seed = self.sampler.seed
        self.outputs = dict((key, getattr(args, key)) for key in OUTPUTS
                            if getattr(args, key, None) is not None)
        self.flags = dict(
            (key, value) for key, value in sorted(vars(args).items())
            if key not in OUTPUTS and key not in ("threads", "verbose"))
        self.flags.update(self.sampler.to_dict())

    def __repr__(self):
        return "RunConfig(%r, seed=%r)" % (self.subcommand, self.seed)

    def run(self):
        """Header embedded into every output"""
        return formatting.format_run(self.flags)


def _common():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="Master seed, defaults to %d" % settings.Seed)
    common.add_argument("--threads", type=int, default=settings.Threads,
                        help="Parallel ensemble width")
    common.add_argument("--verbose", action="store_true",
                        help="Log per-step details")
    return common


def _sampler(parser):
    parser.add_argument("--steps", type=int, default=None,
                        help="Lattice resolution, defaults to %d"
                        % settings.Steps)
    parser.add_argument("--weight-grid", type=int, default=None,
                        help="Weight atoms, defaults to %d"
                        % settings.WeightGrid)
    parser.add_argument("--method", choices=METHODS, default=None)


def parser():
    common = _common()
    root = argparse.ArgumentParser(
        prog="sprtree",
        description="Subtree prune and regraft on weighted real trees")
    root.add_argument("--version", action="version",
                      version="%(prog)s " + version)
    commands = root.add_subparsers(dest="command", metavar="command")
    commands.required = True

    sample = commands.add_parser("sample-crt", parents=[common],
                                 help="Sample a continuum random tree")
    _sampler(sample)
    sample.add_argument("--out", help="Tree JSON, stdout when omitted")
    sample.add_argument("--excursion", help="Also write the excursion CSV")
    sample.add_argument("--newick", help="Also write the Newick topology")

    chain = commands.add_parser("chain", parents=[common],
                                help="Run the SPR jump chain")
    _sampler(chain)
    chain.add_argument("--init", default="crt",
                       help="Tree JSON to start from, or crt")
    chain.add_argument("--time", type=float, required=True,
                       help="Model time horizon")
    chain.add_argument("--time-scale", type=float, default=None)
    chain.add_argument("--observables", default="mean-dist,height,diameter",
                       help="Comma-separated, from %s"
                       % ", ".join(OBSERVABLE_NAMES))
    chain.add_argument("--snapshots", default="",
                       help="Comma-separated jump indices to keep")
    chain.add_argument("--out", help="Trajectory CSV, stdout when omitted")
    chain.add_argument("--snapshot-dir",
                       help="Directory for snapshot tree JSON files")
    chain.add_argument("--final", help="Tree JSON of the final state")

    check = commands.add_parser("verify", parents=[common],
                                help="Monte Carlo checks of closed forms")
    _sampler(check)
    check.add_argument("--test", choices=VERIFY_TESTS, default="estimate")
    check.add_argument("--id", choices=list(FORMULAS.keys()) +
                       list(DISTRIBUTION_CHECKS),
                       help="Formula, or the check a distribution test runs")
    for name in ("x", "p", "alpha", "beta", "p0"):
        check.add_argument("--" + name, type=float)
    check.add_argument("--samples", type=int, default=None)
    check.add_argument("--rho-min", type=float, default=None)
    check.add_argument("--json", help="Report JSON, stdout when omitted")

    dist = commands.add_parser("dist", parents=[common],
                               help="Distances between two tree files")
    dist.add_argument("--a", required=True, help="First tree JSON")
    dist.add_argument("--b", required=True, help="Second tree JSON")
    dist.add_argument("--mode", choices=DIST_MODES, default="delta-ghwt")
    dist.add_argument("--epsilon", type=float, default=None,
                      help="Net spacing, defaults to %r" % settings.NetEpsilon)
    dist.add_argument("--out", help="Bounds JSON, stdout when omitted")

    path = commands.add_parser("path", parents=[common],
                               help="Excursion surgery on CSV paths")
    path.add_argument("action", choices=PATH_ACTIONS)
    path.add_argument("--e", required=True, help="Excursion CSV")
    path.add_argument("--host", help="Host excursion CSV for insert")
    for name in ("s", "a", "u", "rho", "v"):
        path.add_argument("--" + name, type=float)
    path.add_argument("--out", help="Result, stdout when omitted")
    path.add_argument("--hat", help="Excised excursion CSV")
    path.add_argument("--check", help="Remainder CSV")

    return root


def _read(path):
    with open(path) as f:
        return f.read()


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", newline="\n") as f:
        f.write(text)
    log.info("Wrote %s", path)


def _split(text):
    return [item.strip() for item in text.split(",") if item.strip()]


def _observables(text):
    names = []
    for item in _split(text):
        if item not in OBSERVABLE_NAMES:
            raise DomainError("Unknown observable %r, pick from %s"
                              % (item, ", ".join(OBSERVABLE_NAMES)))
        names.append(OBSERVABLE_NAMES[item])
    return names


def _snapshots(text):
    try:
        return [int(item) for item in _split(text)]
    except ValueError:
        raise DomainError("Snapshots must be jump indices, got %r" % text)


def _params(args):
    return dict((name, getattr(args, name))
                for name in ("x", "p", "alpha", "beta", "p0")
                if getattr(args, name) is not None)


def run(args, service=None):
    """Carry out a parsed command line"""
    config = RunConfig(args)
    service = service or Service(config.threads)
    header = config.run()
    cfg = config.sampler
    outputs = config.outputs
    log.info("%r", config)

    if args.command == "sample-crt":
        result = service._dispatch("sample-crt", {"cfg": cfg, "run": header})
        _write(outputs.get("out"), formatting.dumps(result["tree"]))
        if "excursion" in outputs:
            _write(outputs["excursion"], result["excursion"])
        if "newick" in outputs:
            _write(outputs["newick"], result["newick"])

    elif args.command == "chain":
        init = args.init if args.init == "crt" else \
            formatting.loads(_read(args.init))
        result = service._dispatch("chain", {
            "init": init,
            "horizon": args.time,
            "cfg": cfg,
            "observables": _observables(args.observables),
            "snapshots": _snapshots(args.snapshots),
            "time_scale": args.time_scale,
            "run": header,
        })
        _write(outputs.get("out"), result["trajectory"])
        if "snapshot_dir" in outputs:
            for index, doc in result["snapshots"].items():
                _write(os.path.join(outputs["snapshot_dir"],
                                    "snapshot_%d.json" % index),
                       formatting.dumps(doc))
        if "final" in outputs:
            _write(outputs["final"], formatting.dumps(result["final"]))

    elif args.command == "verify":
        if args.test in ("estimate", "cross-validation") and args.id is None:
            raise DomainError("--id is required for %s" % args.test)
        result = service._dispatch("verify", {
            "test": args.test,
            "cfg": cfg,
            "id": args.id,
            "params": _params(args),
            "samples": args.samples,
            "rho_min": args.rho_min,
            "run": header,
        })
        _write(outputs.get("json"), formatting.dumps(result))

    elif args.command == "dist":
        result = service._dispatch("dist", {
            "a": formatting.loads(_read(args.a)),
            "b": formatting.loads(_read(args.b)),
            "mode": args.mode,
            "epsilon": args.epsilon,
            "run": header,
        })
        _write(outputs.get("out"), formatting.dumps(result))

    elif args.command == "path":
        result = service._dispatch("path", {
            "action": args.action,
            "e": _read(args.e),
            "other": _read(args.host) if args.host else None,
            "s": args.s,
            "a": args.a,
            "u": args.u,
            "rho": args.rho,
            "v": args.v,
            "run": header,
        })
        if "hat" in result:
            _write(outputs.get("hat"), result["hat"])
            _write(outputs.get("check"), result["check"])
        elif "path" in result:
            _write(outputs.get("out"), result["path"])
        else:
            _write(outputs.get("out"), formatting.dumps(result))

    return 0


def main(argv=None):
    """Parse `argv` and run the subcommand

    Returns:
        0 on success, 2 on a usage error and 1 on a runtime error

    """

    try:
        args = parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")

    try:
        return run(args)

    except (DomainError, InputError, OSError) as e:
        sys.stderr.write("sprtree %s: %s\n" % (args.command, e))
        return 1

    except Exception:
        log.exception("sprtree %s failed", args.command)
        return 1
