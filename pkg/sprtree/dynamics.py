"""SPR Markov dynamics

The continuous-time jump chain on finite weighted trees, where pairs
(u, v) are drawn from length measure times the weight and the tree
jumps to Theta(T, u, v), and the discrete uniform-SPR chain on
leaf-labelled unrooted binary trees.

"""

import logging
import collections
from fractions import Fraction

import numpy as np
import networkx as nx

from . import settings
from .rtree import (
    spr, total_length, mean_dist, height, diameter, trimmed_length,
    sample_length_point, sample_weight_point)
from .util import DomainError, as_generator

log = logging.getLogger("sprtree")

OBSERVABLES = collections.OrderedDict((
    ("mean_dist", mean_dist),
    ("height", height),
    ("diameter", diameter),
    ("total_length", total_length),
    ("trimmed_length", lambda tree: trimmed_length(tree, settings.NetEpsilon)),
))

DEFAULT_OBSERVABLES = ("mean_dist", "height", "diameter", "total_length")

TransitionMatrix = collections.namedtuple(
    "TransitionMatrix", ["topologies", "probabilities"])


class ChainTrajectory(object):
    """Jump times and observables of one run of the jump chain

    Attributes:
        times (list): Model time of each jump, strictly increasing
        records (OrderedDict): Observable name -> value after each jump
        snapshots (dict): Jump index -> tree, for requested indices
        final (WeightedTree): State at the horizon

    """

    def __init__(self, observables):
        self.times = []
        self.records = collections.OrderedDict(
            (name, []) for name in observables)
        self.snapshots = {}
        self.final = None

    def __len__(self):
        return len(self.times)

    def record(self, time, tree):
        self.times.append(time)
        for name, values in self.records.items():
            values.append(OBSERVABLES[name](tree))

    def rows(self):
        """(jump_index, time, observables...) per jump"""
        for index, time in enumerate(self.times):
            yield [index + 1, time] + [
                values[index] for values in self.records.values()]


def spr_jump_step(tree, rng=None, time_scale=None):
    """Holding time and next state of the jump chain

    The chain leaves T at rate time_scale * mu^T(T), moving to
    Theta(T, u, v) with u from length measure and v from the weight.

    Returns:
        (holding_time, tree)

    """

    rng = as_generator(rng)
    scale = settings.TimeScale if time_scale is None else time_scale
    rate = scale * total_length(tree)
    if not rate > 0:
        raise DomainError("Tree has no length, the chain cannot jump")

    holding = rng.exponential(1.0 / rate)
    u = sample_length_point(tree, rng)
    v = sample_weight_point(tree, rng)
    return holding, spr(tree, u, v)


def run_chain(tree, horizon, observables=DEFAULT_OBSERVABLES,
              snapshots=(), rng=None, time_scale=None):
    """Run the jump chain from `tree` up to model time `horizon`

    Arguments:
        tree (WeightedTree): Initial state
        horizon (float): Model time to stop at
        observables (list, optional): Names from OBSERVABLES
        snapshots (list, optional): Jump indices (from 1) whose trees
            are kept
        rng (optional): Generator or seed
        time_scale (float, optional): Multiplier on the jump rate

    Returns:
        ChainTrajectory

    """

    if not horizon > 0:
        raise DomainError("Horizon must be positive, got %r" % horizon)
    for name in observables:
        if name not in OBSERVABLES:
            raise DomainError("Unknown observable %r" % name)

    rng = as_generator(rng)
    wanted = set(int(i) for i in snapshots)
    trajectory = ChainTrajectory(observables)

    clock = 0.0
    while True:
        holding, following = spr_jump_step(tree, rng, time_scale)
        if clock + holding > horizon:
            break
        clock += holding
        tree = following
        trajectory.record(clock, tree)
        if len(trajectory) in wanted:
            trajectory.snapshots[len(trajectory)] = tree
        log.debug("jump %d at %.6f", len(trajectory), clock)

    trajectory.final = tree
    log.info("Chain made %d jumps up to time %r", len(trajectory), horizon)
    return trajectory


class Cladogram(object):
    """Unrooted binary tree with leaves 1..n

    Internal vertices are relabelled n + 1, n + 2, ... in sorted order of
    the labels they are given with.

    Arguments:
        n (int): Leaf count, at least 3
        edges (list): Vertex pairs

    """

    def __init__(self, n, edges):
        if n < 3:
            raise DomainError("Cladograms need at least 3 leaves")

        graph = nx.Graph()
        graph.add_edges_from(edges)
        leaves = set(range(1, n + 1))
        internal = sorted(v for v in graph if v not in leaves)
        graph = nx.relabel_nodes(
            graph, dict((v, n + 1 + i) for i, v in enumerate(internal)))

        if not leaves <= set(graph) or len(graph) != 2 * n - 2:
            raise DomainError("Expected %d vertices with leaves 1..%d"
                              % (2 * n - 2, n))
        if not nx.is_tree(graph):
            raise DomainError("Not a tree")
        for vertex, degree in graph.degree():
            if degree != (1 if vertex in leaves else 3):
                raise DomainError("Vertex %r has degree %d" % (vertex, degree))

        self.n = n
        self.graph = graph
        self.edges = sorted(tuple(sorted(edge)) for edge in graph.edges())
        self._key = None

    def __repr__(self):
        return "Cladogram(%d, %r)" % (self.n, self.edges)

    def __eq__(self, other):
        return isinstance(other, Cladogram) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @classmethod
    def caterpillar(cls, n):
        """((1, 2), 3, ..., n) laid out along a spine"""
        edges = [(1, n + 1), (2, n + 1)]
        for i in range(2, n - 1):
            edges += [(n + i - 1, n + i), (i + 1, n + i)]
        edges.append((n, 2 * n - 2))
        return cls(n, edges)

    @property
    def key(self):
        """Topology as the sorted splits of the internal edges

        Each split is the side not holding leaf 1.

        """

        if self._key is None:
            splits = []
            for a, b in self.edges:
                if a <= self.n or b <= self.n:
                    continue
                graph = self.graph.copy()
                graph.remove_edge(a, b)
                side = nx.node_connected_component(graph, a)
                if 1 in side:
                    side = set(graph) - side
                splits.append(tuple(sorted(v for v in side if v <= self.n)))
            self._key = tuple(sorted(splits))
        return self._key

    def pruned(self, cut, side):
        """Remainder edges after cutting `cut` and keeping `side` as prune"""
        x, y = cut if side == 0 else cut[::-1]
        graph = self.graph.copy()
        graph.remove_edge(x, y)
        remainder = graph.subgraph(nx.node_connected_component(graph, y))
        return x, y, graph, sorted(tuple(sorted(e)) for e in remainder.edges())

    def regrafted(self, cut, side, target):
        """Prune at `cut` on `side` and reattach on remainder edge `target`

        The pruned subtree hangs from a new vertex inserted into
        `target`; the vertex left with degree 2 is suppressed.

        """

        x, y, graph, _ = self.pruned(cut, side)
        p, q = target
        joint = max(graph) + 1
        graph.remove_edge(p, q)
        graph.add_edges_from([(p, joint), (joint, q), (x, joint)])

        if graph.degree(y) == 2:
            a, b = list(graph.neighbors(y))
            graph.remove_node(y)
            graph.add_edge(a, b)

        return Cladogram(self.n, graph.edges())


def _moves(cladogram):
    """(probability, result) for every cut edge, side and regraft edge"""
    choices = Fraction(1, 2 * len(cladogram.edges))
    for cut in cladogram.edges:
        for side in (0, 1):
            _, _, _, remainder = cladogram.pruned(cut, side)
            if not remainder:
                yield choices, cladogram
                continue
            for target in remainder:
                yield (choices / len(remainder),
                       cladogram.regrafted(cut, side, target))


def cladogram_spr_step(cladogram, rng=None):
    """One step of the uniform SPR chain

    A uniform edge is cut, a fair coin picks the pruned side and a
    uniform edge of the remainder receives it. Proposals that rebuild
    the same topology are kept as self-loops.

    """

    rng = as_generator(rng)
    edges = cladogram.edges
    cut = edges[int(rng.integers(len(edges)))]
    side = int(rng.integers(2))

    _, _, _, remainder = cladogram.pruned(cut, side)
    if not remainder:
        return cladogram
    target = remainder[int(rng.integers(len(remainder)))]
    return cladogram.regrafted(cut, side, target)


def enumerate_topologies(n):
    """All (2n - 5)!! unrooted binary topologies on leaves 1..n

    Built by stepwise addition of leaves into every edge.

    """

    if n < 3:
        raise DomainError("Cladograms need at least 3 leaves")

    # Internal vertices are negative until Cladogram relabels them
    trees = [[(1, -1), (2, -1), (3, -1)]]
    for leaf in range(4, n + 1):
        grown = []
        for edges in trees:
            joint = -leaf + 2
            for i, (a, b) in enumerate(edges):
                grown.append(edges[:i] + edges[i + 1:] +
                             [(a, joint), (joint, b), (leaf, joint)])
        trees = grown

    topologies = dict()
    for edges in trees:
        cladogram = Cladogram(n, edges)
        topologies.setdefault(cladogram.key, cladogram)
    return [topologies[key] for key in sorted(topologies)]


def transition_matrix(n):
    """Exact transition probabilities of the uniform SPR chain

    Arguments:
        n (int): Leaf count, 3 to 6

    Returns:
        TransitionMatrix(topologies, probabilities) with probabilities a
            list of rows of Fractions in the order of `topologies`

    """

    if not 3 <= n <= 6:
        raise DomainError("Transition matrices are enumerated for "
                          "3 <= n <= 6, got %r" % n)

    topologies = enumerate_topologies(n)
    index = dict((c.key, i) for i, c in enumerate(topologies))

    rows = []
    for cladogram in topologies:
        row = [Fraction(0)] * len(topologies)
        for probability, result in _moves(cladogram):
            row[index[result.key]] += probability
        rows.append(row)

    return TransitionMatrix([c.key for c in topologies], rows)


def occupation(n, steps, rng=None, start=None):
    """Empirical topology frequencies of the discrete chain

    Returns:
        Counter of topology keys
    """

    rng = as_generator(rng)
    cladogram = start or Cladogram.caterpillar(n)
    counts = collections.Counter()
    for _ in range(steps):
        cladogram = cladogram_spr_step(cladogram, rng)
        counts[cladogram.key] += 1
    return counts


def as_array(matrix):
    """Float array of a TransitionMatrix"""
    return np.array([[float(p) for p in row] for row in matrix.probabilities])
