import io
import os
import csv
import json
import logging

import numpy as np

from . import schema
from .. import settings
from ..version import version
from ..excursion import Excursion
from ..rtree import Tree, WeightedTree, PointRef, to_newick
from ..util import DomainError, InputError

log = logging.getLogger("sprtree")

# Settings that do not change what is written
_UNRECORDED = ("Threads",)


def _safe():
    return bool(os.getenv("SPRTREE_SAFE"))


def _plain(value):
    """JSON-compatible copy of nested numpy values"""
    if isinstance(value, dict):
        return dict((str(k), _plain(v)) for k, v in value.items())
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _check(data, name):
    try:
        schema.validate(data, name)
    except schema.ValidationError as e:
        raise InputError("Not a valid %s document: %s" % (name, e.message))


def dumps(data):
    """JSON text with sorted keys, reproducible byte for byte"""
    return json.dumps(_plain(data), sort_keys=True, indent=2) + "\n"


def loads(text, name=None):
    """Parse JSON text, validating against schema `name` when given"""
    try:
        data = json.loads(text)
    except ValueError as e:
        raise InputError("Malformed JSON: %s" % e)
    if name is not None:
        _check(data, name)
    return data


def format_run(flags=None):
    """Serialise the tool version and configuration of a run

    Arguments:
        flags (dict, optional): Per-run flags, overriding settings. Must
            hold the seed when it differs from `settings.Seed`

    """

    config = dict(
        (key, value) for key, value in settings.to_dict().items()
        if key not in _UNRECORDED)
    config = dict((_snake(key), value) for key, value in config.items())
    config.update((k, v) for k, v in (flags or {}).items()
                  if k not in ("threads", "verbose"))

    run = {
        "tool": "sprtree",
        "version": version,
        "config": _plain(config),
    }

    if _safe():
        schema.validate(run, "run")

    return run


def _snake(key):
    """WeightGrid -> weight_grid"""
    return "".join("_" + c.lower() if c.isupper() and i else c.lower()
                   for i, c in enumerate(key))


def format_tree(tree, run=None):
    """Serialise `tree`

    Returns:
        Dictionary of the tree JSON document

    """

    output = {
        "vertices": [{"id": v} for v in tree.vertices],
        "edges": [{"a": e.a, "b": e.b, "len": e.length} for e in tree.edges],
        "weights": [{"at": atom.at.to_dict(), "mass": atom.mass}
                    for atom in getattr(tree, "atoms", ())],
        "root": tree.root,
    }

    if run is not None:
        output["run"] = run

    if _safe():
        schema.validate(_plain(output), "tree")

    return output


def parse_tree(data):
    """Tree of a tree JSON document

    Returns:
        WeightedTree, or Tree when the document carries no weights

    Raises:
        InputError if the document is malformed or not a tree

    """

    if isinstance(data, str):
        data = loads(data)
    _check(data, "tree")

    edges = [(e["a"], e["b"], e["len"]) for e in data["edges"]]
    vertices = [v["id"] for v in data["vertices"]]

    try:
        if not data["weights"]:
            return Tree(edges, vertices, data["root"])

        atoms = [(PointRef.from_dict(w["at"]), w["mass"])
                 for w in data["weights"]]
        return WeightedTree(edges, atoms, vertices, data["root"])

    except DomainError as e:
        raise InputError("Not a weighted tree: %s" % e)


def _comments(run):
    if run is None:
        return []
    return ["# %s %s" % (run["tool"], run["version"]),
            "# config %s" % json.dumps(run["config"], sort_keys=True)]


def _number(value):
    return "%.17g" % value


def format_excursion(e, run=None):
    """CSV text of the breakpoints of `e` under a `t,value` header"""
    lines = _comments(run) + ["t,value"]
    lines.extend("%s,%s" % (_number(t), _number(v))
                 for t, v in zip(e.times, e.values))
    return "\n".join(lines) + "\n"


def parse_excursion(text):
    """Excursion of CSV text as written by `format_excursion`

    Raises:
        InputError on a malformed file or a path that is not an excursion

    """

    rows = [line for line in text.splitlines()
            if line.strip() and not line.startswith("#")]
    reader = csv.reader(rows)

    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["t", "value"]:
        raise InputError("Expected a 't,value' header, got %r" % header)

    times, values = [], []
    for number, row in enumerate(reader, 2):
        if len(row) != 2:
            raise InputError("Row %d: expected 2 columns, got %d"
                             % (number, len(row)))
        try:
            times.append(float(row[0]))
            values.append(float(row[1]))
        except ValueError:
            raise InputError("Row %d: not a number in %r" % (number, row))

    try:
        return Excursion(times, values, touching=True)
    except DomainError as e:
        raise InputError("Not an excursion: %s" % e)


def format_trajectory(trajectory, run=None):
    """CSV text of a ChainTrajectory, one row per jump"""
    buffer = io.StringIO()
    for line in _comments(run):
        buffer.write(line + "\n")

    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["jump_index", "time"] + list(trajectory.records))
    for row in trajectory.rows():
        writer.writerow([row[0]] + [_number(v) for v in row[1:]])

    return buffer.getvalue()


def format_report(kind, result, run=None):
    """Serialise a verification result

    Arguments:
        kind (str): "estimate", "distribution", "exchangeability" or
            "cross-validation"
        result: Report with `to_dict`, or a dictionary

    """

    if hasattr(result, "to_dict"):
        result = result.to_dict()

    output = {
        "kind": kind,
        "result": _plain(result),
    }

    if run is not None:
        output["run"] = run

    if _safe():
        schema.validate(output, "report")

    return output


def format_bounds(bounds, mode, epsilon=None, run=None):
    """Serialise a Bounds bracket of distance `mode`"""
    output = {
        "mode": mode,
        "lower": float(bounds.lower),
        "upper": float(bounds.upper),
        "exact": bool(bounds.exact),
        "witness": _plain(bounds.witness),
    }

    if epsilon is not None:
        output["epsilon"] = float(epsilon)

    if run is not None:
        output["run"] = run

    if _safe():
        schema.validate(output, "bounds")

    return output


def format_newick(tree):
    """Newick text with edge lengths; weights are not carried"""
    return to_newick(tree) + "\n"
