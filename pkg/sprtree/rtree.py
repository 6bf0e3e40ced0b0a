"""Finite weighted real trees

A tree is a set of integer vertices joined by edges of positive length.
Points are addressed by `PointRef`, either a vertex or an offset along an
edge measured from the edge's first endpoint. Weighted trees carry a
purely atomic probability measure.

Most operations hang the tree from a point and work on breadth-first
arrays (see `_Rooted`), which keeps the per-tree cost linear and lets
numpy do the per-level work.

"""

import math
import logging
import itertools
import collections
from dataclasses import dataclass

import numpy as np
import networkx as nx
from scipy import sparse
from scipy.sparse import csgraph

from . import settings
from .util import DomainError, as_generator

log = logging.getLogger("sprtree")

TOLERANCE = 1e-12

Edge = collections.namedtuple("Edge", ["a", "b", "length"])
Atom = collections.namedtuple("Atom", ["at", "mass"])
Subtree = collections.namedtuple("Subtree", ["tree", "mass", "height"])


@dataclass(frozen=True)
class PointRef(object):
    """A vertex, or a point strictly inside an edge"""

    vertex: int = None
    edge: int = None
    offset: float = 0.0

    @classmethod
    def at(cls, vertex):
        return cls(vertex=int(vertex))

    @classmethod
    def on(cls, edge, offset):
        return cls(edge=int(edge), offset=float(offset))

    @property
    def is_vertex(self):
        return self.vertex is not None

    def to_dict(self):
        if self.is_vertex:
            return {"vertex": self.vertex}
        return {"edge": self.edge, "offset": self.offset}

    @classmethod
    def from_dict(cls, data):
        if "vertex" in data:
            return cls.at(data["vertex"])
        return cls.on(data["edge"], data["offset"])


class Tree(object):
    """Metric tree without weight, also used for skeletons

    Arguments:
        edges (list): Triplets (a, b, length)
        vertices (list, optional): Vertex ids, derived from `edges`
            when omitted
        root (int, optional): Distinguished vertex, defaults to the
            first vertex
        validate (bool, optional): Check that the graph is a tree

    """

    def __init__(self, edges, vertices=None, root=None, validate=True):
        self.edges = tuple(Edge(int(a), int(b), float(length))
                           for a, b, length in edges)

        if vertices is None:
            vertices = sorted(set(itertools.chain.from_iterable(
                (edge.a, edge.b) for edge in self.edges)))
        self.vertices = tuple(int(v) for v in vertices)

        if not self.vertices:
            raise DomainError("A tree needs at least one vertex")

        self.root = self.vertices[0] if root is None else int(root)
        self._adjacency = None

        if validate:
            self._validate()

    def __repr__(self):
        return "%s.%s(vertices=%d, length=%r)" % (
            __name__, type(self).__name__,
            len(self.vertices), total_length(self))

    def _validate(self):
        ids = set(self.vertices)
        if len(ids) != len(self.vertices):
            raise DomainError("Duplicate vertex ids")
        if self.root not in ids:
            raise DomainError("Root %r is not a vertex" % self.root)

        for edge in self.edges:
            if edge.a not in ids or edge.b not in ids:
                raise DomainError("Edge %r refers to unknown vertices"
                                  % (edge,))
            if not (edge.length > 0 and math.isfinite(edge.length)):
                raise DomainError("Edge lengths must be positive, got %r"
                                  % edge.length)

        graph = nx.Graph()
        graph.add_nodes_from(self.vertices)
        graph.add_edges_from((edge.a, edge.b) for edge in self.edges)
        if graph.number_of_edges() != len(self.edges):
            raise DomainError("Parallel edges")
        if not nx.is_tree(graph):
            raise DomainError("Graph is not connected and acyclic")

    @property
    def adjacency(self):
        """vertex -> list of (edge index, neighbour)"""
        if self._adjacency is None:
            adjacency = dict((v, []) for v in self.vertices)
            for index, edge in enumerate(self.edges):
                adjacency[edge.a].append((index, edge.b))
                adjacency[edge.b].append((index, edge.a))
            self._adjacency = adjacency
        return self._adjacency

    @property
    def lengths(self):
        return np.array([edge.length for edge in self.edges], dtype=float)

    def point(self, edge, offset):
        """Normalised reference to `offset` along `edge`"""
        a, b, length = self.edges[edge]
        if offset <= 0:
            return PointRef.at(a)
        if offset >= length:
            return PointRef.at(b)
        return PointRef.on(edge, offset)

    def check(self, ref):
        """Return `ref` if it addresses a point of this tree"""
        if ref.is_vertex:
            if ref.vertex not in self.adjacency:
                raise DomainError("No vertex %r" % ref.vertex)
        else:
            if not 0 <= ref.edge < len(self.edges):
                raise DomainError("No edge %r" % ref.edge)
            if not 0 < ref.offset < self.edges[ref.edge].length:
                raise DomainError("Offset %r outside edge %r"
                                  % (ref.offset, ref.edge))
        return ref


class WeightedTree(Tree):
    """Tree with an atomic probability measure

    Arguments:
        edges (list): Triplets (a, b, length)
        atoms (list): Pairs (PointRef, mass), masses summing to one
        contour (Contour, optional): Time correspondence of a tree
            built from an excursion

    """

    def __init__(self, edges, atoms, vertices=None, root=None,
                 validate=True, contour=None):
        super(WeightedTree, self).__init__(edges, vertices, root, validate)
        self.atoms = tuple(Atom(ref, float(mass)) for ref, mass in atoms)
        self.contour = contour

        if validate:
            for atom in self.atoms:
                self.check(atom.at)
                if not atom.mass >= 0:
                    raise DomainError("Negative mass %r" % atom.mass)
            if abs(math.fsum(self.masses) - 1.0) > TOLERANCE:
                raise DomainError("Masses must sum to 1, got %r"
                                  % math.fsum(self.masses))

    @property
    def masses(self):
        return np.array([atom.mass for atom in self.atoms], dtype=float)


class _Rooted(object):
    """Breadth-first arrays of a tree hung from one of its vertices

    Position 0 is the root; parent[i] < i for every other position, and
    positions are grouped by depth so each level is a contiguous slice.

    """

    def __init__(self, vertices, edges, root, mass=None):
        adjacency = dict((v, []) for v in vertices)
        for a, b, length in edges:
            adjacency[a].append((b, length))
            adjacency[b].append((a, length))

        order = [root]
        parent = [-1]
        length = [0.0]
        depth = [0]
        index = {root: 0}

        i = 0
        while i < len(order):
            x = order[i]
            for y, edge_length in adjacency[x]:
                if y in index:
                    continue
                index[y] = len(order)
                order.append(y)
                parent.append(i)
                length.append(edge_length)
                depth.append(depth[i] + 1)
            i += 1

        self.order = order
        self.index = index
        self.parent = np.array(parent, dtype=int)
        self.length = np.array(length, dtype=float)
        self.depth = np.array(depth, dtype=int)

        bounds = np.searchsorted(self.depth, np.arange(self.depth[-1] + 2))
        self.levels = [slice(bounds[d], bounds[d + 1])
                       for d in range(1, len(bounds) - 1)]

        self.mass = np.zeros(len(order))
        for vertex, value in (mass or {}).items():
            self.mass[index[vertex]] += value

        self.dist = np.zeros(len(order))
        for level in self.levels:
            self.dist[level] = self.dist[self.parent[level]] + \
                self.length[level]

    def __len__(self):
        return len(self.order)

    def subtree_mass(self):
        weight = self.mass.copy()
        for level in reversed(self.levels):
            np.add.at(weight, self.parent[level], weight[level])
        return weight

    def reach_down(self):
        """Largest distance from each position into its own subtree"""
        reach = np.zeros(len(self))
        for level in reversed(self.levels):
            np.maximum.at(reach, self.parent[level],
                          self.length[level] + reach[level])
        return reach

    def reach_up(self):
        """Largest distance from parent(i) to points outside subtree(i)"""
        down = self.reach_down()
        n = len(self)
        up = np.zeros(n)
        if n == 1:
            return up

        parent = self.parent[1:]
        candidate = self.length[1:] + down[1:]

        best = np.zeros(n)
        np.maximum.at(best, parent, candidate)
        top = candidate >= best[parent]
        count = np.bincount(parent[top], minlength=n)
        second = np.zeros(n)
        np.maximum.at(second, parent[~top], candidate[~top])
        second = np.where(count >= 2, best, second)

        sibling = np.zeros(n)
        sibling[1:] = np.where(top, second[parent], best[parent])

        through = np.zeros(n)
        for level in self.levels:
            up[level] = np.maximum(through[self.parent[level]],
                                   sibling[level])
            through[level] = self.length[level] + up[level]

        return up

    def children(self):
        children = [[] for _ in range(len(self))]
        for i in range(1, len(self)):
            children[self.parent[i]].append(i)
        return children

    def branches(self):
        """Position of the root child above each position, -1 at root"""
        branch = np.arange(len(self))
        branch[0] = -1
        for level in self.levels[1:]:
            branch[level] = branch[self.parent[level]]
        return branch


def _refine(tree, refs):
    """Split edges so every reference becomes a vertex

    Returns:
        (vertices, edges, ids): Vertex list, list of (a, b, length) and
            the vertex of each reference

    """

    ids = [None] * len(refs)
    cuts = {}
    for i, ref in enumerate(refs):
        tree.check(ref)
        if ref.is_vertex:
            ids[i] = ref.vertex
        else:
            cuts.setdefault(ref.edge, []).append((ref.offset, i))

    vertices = list(tree.vertices)
    edges = []
    fresh = max(tree.vertices) + 1

    for index, (a, b, length) in enumerate(tree.edges):
        points = cuts.get(index)
        if not points:
            edges.append((a, b, length))
            continue

        points.sort()
        previous, start = a, 0.0
        for offset, i in points:
            if offset == start:
                ids[i] = previous
                continue
            edges.append((previous, fresh, offset - start))
            vertices.append(fresh)
            ids[i] = previous = fresh
            start = offset
            fresh += 1
        edges.append((previous, b, length - start))

    return vertices, edges, ids


def _hang(tree, refs=(), root=None, weighted=False):
    """Refine at `refs` (and atoms) and hang from `root`"""
    atoms = tree.atoms if weighted else ()
    everything = [atom.at for atom in atoms] + list(refs)
    if root is not None:
        everything.append(root)

    vertices, edges, ids = _refine(tree, everything)

    mass = {}
    for atom, vertex in zip(atoms, ids):
        mass[vertex] = mass.get(vertex, 0.0) + atom.mass

    root_id = ids[-1] if root is not None else tree.root
    rooted = _Rooted(vertices, edges, root_id, mass)
    return rooted, ids[len(atoms):len(atoms) + len(refs)]


def _compress(vertices, edges, root, marks=()):
    """Suppress degree-2 vertices other than `root`

    Returns:
        (vertices, edges, where): Kept vertices, merged edges and a
            dict mapping each vertex in `marks` to its PointRef

    """

    adjacency = dict((v, []) for v in vertices)
    for index, (a, b, _) in enumerate(edges):
        adjacency[a].append(index)
        adjacency[b].append(index)

    keep = [v for v in vertices if len(adjacency[v]) != 2 or v == root]
    kept = set(keep)
    used = [False] * len(edges)
    merged = []
    where = {}

    for start in keep:
        where[start] = PointRef.at(start)
        for first in adjacency[start]:
            if used[first]:
                continue

            current, index, distance, inner = start, first, 0.0, []
            while True:
                used[index] = True
                a, b, length = edges[index]
                following = b if a == current else a
                distance += length
                if following in kept:
                    break
                inner.append((following, distance))
                left, right = adjacency[following]
                index = right if left == index else left
                current = following

            for vertex, offset in inner:
                where[vertex] = PointRef.on(len(merged), offset)
            merged.append((start, following, distance))

    return keep, merged, dict((m, where[m]) for m in marks)


class Contour(object):
    """Time correspondence between an excursion and its tree

    Arguments:
        excursion (Excursion): The encoding path
        deep (array): Vertex image of each breakpoint
        parent (array): Parent of each vertex, root is its own parent
        height (array): Distance of each vertex from the root

    """

    def __init__(self, excursion, deep, parent, height):
        self.excursion = excursion
        self.deep = np.asarray(deep, dtype=int)
        self.parent = np.asarray(parent, dtype=int)
        self.height = np.asarray(height, dtype=float)

        lift = [self.parent]
        for _ in range(max(1, int(len(self.parent)).bit_length())):
            lift.append(lift[-1][lift[-1]])
        self._lift = lift

    def locate(self, times):
        """Tree points of excursion times

        Returns:
            list of PointRef

        """

        e = self.excursion
        t, v = e.times, e.values
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(times < 0) or np.any(times > e.length):
            raise DomainError("Time outside [0, %r]" % e.length)

        levels = np.interp(times, t, v)
        segment = np.clip(np.searchsorted(t, times, side="left"),
                          1, len(t) - 1)
        rising = v[segment] > v[segment - 1]
        current = np.where(rising,
                           self.deep[segment], self.deep[segment - 1])

        tol = TOLERANCE * max(1.0, e.max)
        for table in reversed(self._lift):
            candidate = table[current]
            climb = self.height[candidate] >= levels - tol
            current = np.where(climb, candidate, current)

        refs = []
        for vertex, level in zip(current, levels):
            if self.height[vertex] <= level + tol:
                refs.append(PointRef.at(vertex))
            else:
                base = self.height[self.parent[vertex]]
                refs.append(PointRef.on(vertex - 1, level - base))
        return refs


def tree_from_excursion(e, weight_grid=None, times=None):
    """The tree T_e coded by a piecewise-linear excursion

    Vertices are the images of breakpoint times, numbered from the root
    (vertex 0) in the order the contour first meets them; the edge into
    vertex c has index c - 1. The weight puts mass 1/m at the image of
    each grid time (i - 1/2) zeta / m.

    Arguments:
        e (Excursion): Contour
        weight_grid (int, optional): Atom count m, defaults to
            `settings.WeightGrid`
        times (array, optional): Explicit atom times instead of the grid

    Returns:
        WeightedTree with a `contour` for `tree_point_at`

    """

    if times is None:
        m = settings.WeightGrid if weight_grid is None else int(weight_grid)
        if m < 1:
            raise DomainError("Weight grid must be at least 1, got %r" % m)
        times = (np.arange(m) + 0.5) * (e.length / m)
    else:
        times = np.asarray(times, dtype=float)
        if len(times) < 1:
            raise DomainError("No atom times given")

    t, v = e.times, e.values
    tol = TOLERANCE * max(1.0, e.max)

    parent = [0]
    height = [0.0]
    stack = [0]
    deep = [0]

    for i in range(1, len(t)):
        level = v[i]
        if level > v[i - 1]:
            parent.append(stack[-1])
            height.append(level)
            stack.append(len(height) - 1)
        else:
            popped = None
            while height[stack[-1]] > level + tol:
                popped = stack.pop()
            if height[stack[-1]] < level - tol:
                split = len(height)
                parent.append(stack[-1])
                height.append(level)
                parent[popped] = split
                stack.append(split)
        deep.append(stack[-1])

    edges = [(parent[c], c, height[c] - height[parent[c]])
             for c in range(1, len(height))]
    contour = Contour(e, deep, parent, height)

    refs = contour.locate(times)
    mass = 1.0 / len(times)

    return WeightedTree(edges, [(ref, mass) for ref in refs],
                        vertices=range(len(height)), root=0,
                        validate=False, contour=contour)


def tree_point_at(tree, t):
    """Image of excursion time `t` in a tree built by `tree_from_excursion`"""
    if getattr(tree, "contour", None) is None:
        raise DomainError("Tree carries no contour")
    return tree.contour.locate([t])[0]


def distance(tree, p, q):
    """Length of the unique path between two points"""
    if p == q:
        tree.check(p)
        return 0.0
    rooted, ids = _hang(tree, [q], root=p)
    return float(rooted.dist[rooted.index[ids[0]]])


def distance_matrix(tree, points):
    """Pairwise distances between `points`, shortest paths on the refined tree"""
    vertices, edges, ids = _refine(tree, list(points))
    position = dict((v, i) for i, v in enumerate(vertices))

    rows = [position[a] for a, _, _ in edges]
    cols = [position[b] for _, b, _ in edges]
    weights = [length for _, _, length in edges]
    graph = sparse.csr_matrix((weights, (rows, cols)),
                              shape=(len(vertices), len(vertices)))

    targets = [position[i] for i in ids]
    unique = sorted(set(targets))
    dist = csgraph.shortest_path(graph, method="D", directed=False,
                                 indices=unique)
    row = dict((p, i) for i, p in enumerate(unique))
    return np.array([[dist[row[a], b] for b in targets] for a in targets])


def four_point_violation(tree, points=None, samples=None, rng=None):
    """Largest excess of the four-point condition over quadruples

    In a tree the two largest of the three pairings
    d(a,b)+d(c,d), d(a,c)+d(b,d), d(a,d)+d(b,c) are equal; this returns
    the largest gap between them.

    Arguments:
        tree (Tree): Tree to check
        points (list, optional): PointRefs, defaults to the vertices
        samples (int, optional): Random quadruples instead of all of them
        rng (optional): Generator or seed for sampling

    """

    if points is None:
        points = [PointRef.at(v) for v in tree.vertices]
    n = len(points)
    if n < 4:
        return 0.0

    d = distance_matrix(tree, points)
    if samples is None:
        quads = np.array(list(itertools.combinations(range(n), 4)))
    else:
        rng = as_generator(rng)
        quads = np.argsort(rng.random((samples, n)), axis=1)[:, :4]

    a, b, c, e = quads.T
    sums = np.sort(np.stack((d[a, b] + d[c, e],
                             d[a, c] + d[b, e],
                             d[a, e] + d[b, c])), axis=0)
    return float(np.max(sums[2] - sums[1]))


def total_length(tree):
    """mu^T(T)"""
    return math.fsum(edge.length for edge in tree.edges)


def height(tree, root=None):
    """Largest distance from `root`, the tree's root by default"""
    root = PointRef.at(tree.root) if root is None else root
    rooted, _ = _hang(tree, root=root)
    return float(rooted.dist.max())


def diameter(tree):
    rooted, _ = _hang(tree)
    far = rooted.order[int(np.argmax(rooted.dist))]
    rooted, _ = _hang(tree, root=PointRef.at(far))
    return float(rooted.dist.max())


def mean_dist(tree):
    """Mean distance between two independent points drawn from the weight

    Each edge contributes its length times the chance of separating the
    two points, 2 w (1 - w) with w the mass below it.

    """

    rooted, _ = _hang(tree, weighted=True)
    below = rooted.subtree_mass()[1:]
    return float(np.sum(rooted.length[1:] * 2.0 * below * (1.0 - below)))


def trim_rooted(tree, root, epsilon):
    """R_eps(T, root): points with a point at least `epsilon` beyond them

    Returns:
        Tree skeleton rooted at the image of `root`

    """

    if not epsilon > 0:
        raise DomainError("epsilon must be positive, got %r" % epsilon)

    rooted, _ = _hang(tree, root=root)
    down = rooted.reach_down()
    tol = TOLERANCE * max(1.0, total_length(tree))
    origin = rooted.order[0]
    fresh = max(rooted.order) + 1

    edges = []
    for i in range(1, len(rooted)):
        length = rooted.length[i]
        keep = min(length, length + down[i] - epsilon)
        if keep <= tol:
            continue
        top = rooted.order[rooted.parent[i]]
        if down[i] >= epsilon:
            edges.append((top, rooted.order[i], length))
        else:
            edges.append((top, fresh, keep))
            fresh += 1

    if not edges:
        return Tree([], vertices=[origin], root=origin, validate=False)
    return Tree(edges, root=origin, validate=False)


def trim(tree, epsilon):
    """R_eps(T), the intersection of the rooted trimmings over all roots

    A single point when diam(T) <= epsilon, and also when no point has
    `epsilon` of room on two sides.

    """

    if not epsilon > 0:
        raise DomainError("epsilon must be positive, got %r" % epsilon)

    singleton = Tree([], vertices=[tree.root], root=tree.root,
                     validate=False)
    if diameter(tree) <= epsilon:
        return singleton

    rooted, _ = _hang(tree)
    down = rooted.reach_down()
    up = rooted.reach_up()
    tol = TOLERANCE * max(1.0, total_length(tree))
    fresh = max(rooted.order) + 1

    edges = []
    for i in range(1, len(rooted)):
        length = rooted.length[i]
        lo = max(0.0, epsilon - up[i])
        hi = min(length, length + down[i] - epsilon)
        if hi - lo <= tol:
            continue

        if lo <= 0:
            a = rooted.order[rooted.parent[i]]
        else:
            a, fresh = fresh, fresh + 1
        if hi >= length:
            b = rooted.order[i]
        else:
            b, fresh = fresh, fresh + 1
        edges.append((a, b, hi - lo))

    if not edges:
        return singleton

    root = tree.root if any(tree.root in edge[:2] for edge in edges) \
        else None
    return Tree(edges, root=root, validate=False)


def trimmed_length(tree, epsilon):
    """mu^T(R_eps(T))"""
    return total_length(trim(tree, epsilon))


def _away_from(rooted, vertex):
    """Position of the root child on the path to `vertex`"""
    return rooted.branches()[rooted.index[vertex]]


def subtree(tree, u, v):
    """S^{T,u,v}: everything cut off from `v` by `u`

    Arguments:
        tree (WeightedTree): Tree
        u (PointRef): Cut point
        v (PointRef): Point that stays behind, distinct from `u`

    Returns:
        Subtree(tree, mass, height): Skeleton rooted at `u`, weight
            strictly inside (an atom at u does not count) and largest
            distance from `u`

    """

    rooted, ids = _hang(tree, [v], root=u, weighted=True)
    if ids[0] == rooted.order[0]:
        raise DomainError("u and v must differ")

    towards = _away_from(rooted, ids[0])
    branch = rooted.branches()
    inside = (branch != towards) & (branch >= 0)

    weight = rooted.subtree_mass()
    down = rooted.reach_down()
    tops = np.flatnonzero(inside & (rooted.parent == 0))

    mass = float(np.sum(weight[tops])) if len(tops) else 0.0
    reach = float(np.max(rooted.length[tops] + down[tops])) \
        if len(tops) else 0.0

    origin = rooted.order[0]
    members = np.flatnonzero(inside)
    edges = [(rooted.order[rooted.parent[i]], rooted.order[i],
              rooted.length[i]) for i in members]
    vertices = [origin] + [rooted.order[i] for i in members]
    vertices, edges, _ = _compress(vertices, edges, origin)

    skeleton = Tree(edges, vertices=vertices, root=origin, validate=False)
    return Subtree(skeleton, mass, reach)


def spr_with_points(tree, u, v, points=(), suppress=True):
    """Theta(T, u, v) carrying extra points along

    The part of the tree cut off from `v` by `u` is pruned at `u` and
    regrafted at `v`, taking its atoms with it. `u` stays behind as a
    leaf of the remaining tree.

    Returns:
        (tree, points): The rearranged WeightedTree and the images of
            `points`

    """

    points = list(points)
    atoms = [atom.at for atom in tree.atoms]
    vertices, edges, ids = _refine(tree, atoms + [u, v] + points)
    iu, iv = ids[len(atoms)], ids[len(atoms) + 1]
    carried = ids[len(atoms) + 2:]

    if iu == iv:
        return tree, points

    rooted = _Rooted(vertices, edges, iu)
    towards = rooted.order[_away_from(rooted, iv)]
    moving = set(rooted.order[c] for c in np.flatnonzero(rooted.parent == 0))
    moving.discard(towards)

    if not moving:
        return tree, points

    regrafted = []
    for a, b, length in edges:
        if a == iu and b in moving:
            a = iv
        elif b == iu and a in moving:
            b = iv
        regrafted.append((a, b, length))

    marks = set(ids[:len(atoms)]) | set(carried)
    if suppress:
        vertices, regrafted, where = _compress(
            vertices, regrafted, tree.root, marks)
    else:
        where = dict((m, PointRef.at(m)) for m in marks)

    result = WeightedTree(
        regrafted,
        [(where[i], atom.mass) for i, atom in zip(ids, tree.atoms)],
        vertices=vertices, root=tree.root, validate=False)

    log.debug("spr moved %d branch(es) onto %r", len(moving), iv)
    return result, [where[i] for i in carried]


def spr(tree, u, v):
    """Theta(T, u, v); identity when u = v or nothing hangs off u"""
    return spr_with_points(tree, u, v)[0]


def spr_meandist_bound(tree, u, v):
    """Compare the change of mean distance under spr with its bound

    Returns:
        (lhs, rhs): (d(T) - d(spr))^2 and 4 nu(S)^2 nu(T \\ S)^2 d(u,v)^2

    Raises:
        AssertionError if the inequality fails

    """

    if _same_point(tree, u, v):
        return 0.0, 0.0

    part = subtree(tree, u, v)
    gap = distance(tree, u, v)
    lhs = (mean_dist(tree) - mean_dist(spr(tree, u, v))) ** 2
    rhs = 4.0 * part.mass ** 2 * (1.0 - part.mass) ** 2 * gap ** 2

    if lhs > rhs + 1e-12:
        raise AssertionError("Mean distance moved by more than allowed: "
                             "%r > %r" % (lhs, rhs))
    return lhs, rhs


def _same_point(tree, p, q):
    return p == q or distance(tree, p, q) == 0


def edge_functional(tree, kind, param, rooted=False):
    """Exact integral of a subtree functional against mu x nu

    Computes the integral over v ~ nu and u ~ mu^T of F(S^{T,u,v}).
    Along an edge the subtree is constant in mass and its height grows
    linearly, so each edge contributes in closed form.

    Arguments:
        tree (WeightedTree): Tree
        kind (str): "height_tail" (1{height > x}), "height_power"
            (height ** alpha), "mass_tail" (1{mass > p}) or
            "mass_power" (mass ** beta)
        param (float): x, alpha, p or beta
        rooted (bool, optional): Integrate v against the unit mass at
            the root instead of the weight

    """

    hung, _ = _hang(tree, weighted=True)
    length = hung.length[1:]
    weight = hung.subtree_mass()[1:]
    down = hung.reach_down()[1:]

    def integrate(mass, reach):
        if kind == "height_tail":
            return np.clip(length + reach - param, 0.0, length)
        if kind == "height_power":
            return ((reach + length) ** (param + 1) -
                    reach ** (param + 1)) / (param + 1)
        if kind == "mass_tail":
            return length * (mass > param)
        if kind == "mass_power":
            return length * np.clip(mass, 0.0, None) ** param
        raise DomainError("Unknown functional %r" % kind)

    # Subtree below the cut, v on the root side
    below = integrate(weight, down)
    if rooted:
        return float(np.sum(below))

    # Subtree above the cut, v below it
    above = integrate(1.0 - weight, hung.reach_up()[1:])
    return float(np.sum((1.0 - weight) * below + weight * above))


def sample_length_point(tree, rng=None):
    """Point drawn from normalised length measure"""
    rng = as_generator(rng)
    lengths = tree.lengths
    total = lengths.sum()
    if not total > 0:
        raise DomainError("Tree has no length to sample from")
    edge = int(rng.choice(len(lengths), p=lengths / total))
    return tree.point(edge, rng.random() * lengths[edge])


def sample_weight_point(tree, rng=None):
    """Atom drawn proportionally to its mass"""
    rng = as_generator(rng)
    masses = tree.masses
    index = int(rng.choice(len(masses), p=masses / masses.sum()))
    return tree.atoms[index].at


def eps_net_bound(tree, epsilon):
    """Cardinality bound ceil(2mu/eps) ceil(2mu/eps + 1)"""
    ratio = 2.0 * total_length(tree) / epsilon
    return int(math.ceil(ratio) * math.ceil(ratio + 1))


def eps_net(tree, epsilon):
    """Points within `epsilon` of every point of the tree

    Candidates are the vertices and a grid of spacing at most eps/4 on
    every edge; a candidate is taken unless an earlier choice lies within
    7 eps / 8 of it.

    """

    if not epsilon > 0:
        raise DomainError("epsilon must be positive, got %r" % epsilon)

    if not tree.edges or diameter(tree) <= epsilon:
        return [PointRef.at(tree.root)]

    step = epsilon / 4.0
    radius = epsilon - step / 2.0

    graph = nx.Graph()
    candidates = [PointRef.at(v) for v in tree.vertices]
    graph.add_nodes_from(candidates)
    for index, (a, b, length) in enumerate(tree.edges):
        pieces = int(math.ceil(length / step))
        chain = [PointRef.at(a)]
        for k in range(1, pieces):
            ref = PointRef.on(index, length * k / pieces)
            candidates.append(ref)
            chain.append(ref)
        chain.append(PointRef.at(b))
        for left, right in zip(chain, chain[1:]):
            graph.add_edge(left, right, weight=length / pieces)

    covered = set()
    net = []
    for candidate in candidates:
        if candidate in covered:
            continue
        net.append(candidate)
        covered.update(nx.single_source_dijkstra_path_length(
            graph, candidate, cutoff=radius))

    return net


def to_newick(tree):
    """Newick text of the topology with edge lengths, weights dropped"""
    rooted = _Rooted(tree.vertices, tree.edges, tree.root)
    children = rooted.children()
    text = [None] * len(rooted)

    for i in reversed(range(len(rooted))):
        label = str(rooted.order[i])
        if children[i]:
            label = "(%s)%s" % (",".join(text[c] for c in children[i]),
                                label)
        if i:
            label += ":%r" % float(rooted.length[i])
        text[i] = label

    return text[0] + ";"
