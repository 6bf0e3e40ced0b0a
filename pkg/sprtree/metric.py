"""Distances between finite metric spaces and weighted trees

Gromov-Hausdorff distance through correspondences, the Prohorov distance
through couplings, and the weighted semimetric Delta_GHwt through
epsilon-isometries. Exhaustive searches are used while the search space
is small; beyond that the functions return a certified bracket.

"""

import math
import logging
import itertools
import collections
from fractions import Fraction

import numpy as np
import networkx as nx

from . import settings, rtree
from .util import DomainError, as_generator

log = logging.getLogger("sprtree")

TOLERANCE = 1e-12

Bounds = collections.namedtuple("Bounds", ["lower", "upper", "exact", "witness"])


class FiniteMetricSpace(object):
    """Points 0..n-1 with a distance matrix

    Arguments:
        dist (array-like): Symmetric n x n matrix with zero diagonal
        validate (bool, optional): Check the metric axioms

    """

    def __init__(self, dist, validate=True):
        dist = np.array(dist, dtype=float)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1] or not len(dist):
            raise DomainError("Distance matrix must be square and nonempty")

        if validate:
            if not np.array_equal(dist, dist.T):
                raise DomainError("Distance matrix is not symmetric")
            if np.any(np.diag(dist) != 0) or np.any(dist < 0):
                raise DomainError("Distances must be nonnegative, "
                                  "zero on the diagonal")
            scale = TOLERANCE * max(1.0, float(dist.max()))
            through = dist[:, :, None] + dist[None, :, :]
            if np.any(dist[:, None, :] > through + scale):
                raise DomainError("Triangle inequality fails")

        dist.setflags(write=False)
        self.dist = dist

    def __len__(self):
        return len(self.dist)

    @property
    def diameter(self):
        return float(self.dist.max())


class AtomicMeasure(object):
    """Probability masses on the points of a finite space"""

    def __init__(self, masses):
        masses = np.array(masses, dtype=float)
        if masses.ndim != 1 or np.any(masses < 0):
            raise DomainError("Masses must be a nonnegative vector")
        if abs(math.fsum(masses) - 1.0) > TOLERANCE:
            raise DomainError("Masses must sum to 1, got %r"
                              % math.fsum(masses))
        self.masses = masses

    def __len__(self):
        return len(self.masses)

    def push(self, f, size):
        """Image measure under the map `f` into a space of `size` points"""
        return AtomicMeasure(np.bincount(np.asarray(f), weights=self.masses,
                                         minlength=size))


class WeightedSpace(FiniteMetricSpace):
    """Finite metric space with a probability measure

    Arguments:
        dist (array-like): Distance matrix
        masses (array-like): Masses of the points
        refs (list, optional): Tree points the space was built from

    """

    def __init__(self, dist, masses, validate=True, refs=None):
        super(WeightedSpace, self).__init__(dist, validate)
        self.measure = masses if isinstance(masses, AtomicMeasure) \
            else AtomicMeasure(masses)
        if len(self.measure) != len(self):
            raise DomainError("Need one mass per point")
        self.refs = refs


class Correspondence(object):
    """Relation between X and Y whose projections are onto"""

    def __init__(self, pairs, sizes):
        pairs = sorted(set((int(x), int(y)) for x, y in pairs))
        if not pairs:
            raise DomainError("Empty correspondence")
        n, m = sizes
        if set(x for x, _ in pairs) != set(range(n)) or \
                set(y for _, y in pairs) != set(range(m)):
            raise DomainError("Correspondence must cover both spaces")
        self.pairs = pairs
        self.sizes = (n, m)

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    @classmethod
    def from_maps(cls, f, g):
        """Graph of f: X -> Y together with the transpose of g: Y -> X"""
        pairs = [(x, y) for x, y in enumerate(f)] + \
            [(x, y) for y, x in enumerate(g)]
        return cls(pairs, (len(f), len(g)))


def _dist(space):
    return space.dist if isinstance(space, FiniteMetricSpace) \
        else np.asarray(space, dtype=float)


def _masses(measure):
    return measure.masses if isinstance(measure, AtomicMeasure) \
        else np.asarray(measure, dtype=float)


def _pair_distortion(dx, dy, xs, ys):
    xs, ys = np.asarray(xs), np.asarray(ys)
    if not len(xs):
        raise DomainError("Empty relation")
    return float(np.max(np.abs(dx[np.ix_(xs, xs)] - dy[np.ix_(ys, ys)])))


def distortion(X, Y, R):
    """dis(R), the worst mismatch of distances over related pairs"""
    pairs = list(R)
    if not pairs:
        raise DomainError("Empty correspondence")
    xs, ys = zip(*pairs)
    return _pair_distortion(_dist(X), _dist(Y), xs, ys)


def map_distortion(X, Y, f):
    """dis(f) for a map given as an array of images"""
    return _pair_distortion(_dist(X), _dist(Y), np.arange(len(f)), f)


def cover_radius(Y, image):
    """Smallest r such that `image` is an r-net of Y"""
    dy = _dist(Y)
    return float(np.max(np.min(dy[:, np.unique(image)], axis=1)))


def _search_correspondence(dx, dy):
    """Smallest distortion over unions of map graphs, by branch and bound

    Every correspondence contains the graph of some f: X -> Y and the
    transpose of some g: Y -> X, so these unions attain the minimum.

    """

    n, m = len(dx), len(dy)
    best = [math.inf, None]
    xs, ys = [], []

    def extend(k, current):
        if current >= best[0]:
            return
        if k == n + m:
            best[0], best[1] = current, list(zip(xs, ys))
            return

        if k < n:
            options = [(k, y) for y in range(m)]
            if xs:
                gaps = np.abs(dx[k, xs][None, :] - dy[:, ys])
                costs = gaps.max(axis=1)
            else:
                costs = np.zeros(m)
        else:
            y = k - n
            options = [(x, y) for x in range(n)]
            gaps = np.abs(dx[:, xs] - dy[y, ys][None, :])
            costs = gaps.max(axis=1)

        for position in np.argsort(costs, kind="stable"):
            x, y = options[position]
            xs.append(x)
            ys.append(y)
            extend(k + 1, max(current, float(costs[position])))
            xs.pop()
            ys.pop()

    extend(0, 0.0)
    return best[0], sorted(set(best[1]))


def _nearest(values, row):
    """Distance from each value to the sorted array `row`"""
    position = np.searchsorted(row, values)
    left = row[np.clip(position - 1, 0, len(row) - 1)]
    right = row[np.clip(position, 0, len(row) - 1)]
    return np.minimum(np.abs(values - left), np.abs(values - right))


def _gh_lower(dx, dy):
    """Certified lower bound on twice the Gromov-Hausdorff distance

    For a correspondence of distortion r, every x has a partner y with
    each other x' related to some y' such that |dx - dy| <= r.

    """

    bound = abs(dx.max() - dy.max())
    for a, b in ((dx, dy), (dy, dx)):
        rows = np.sort(b, axis=1)
        worst = np.empty((len(a), len(b)))
        for j, row in enumerate(rows):
            worst[:, j] = _nearest(a, row).max(axis=1)
        bound = max(bound, float(worst.min(axis=1).max()))
    return bound


def _index_map(n, m):
    if n == 1:
        return np.zeros(1, dtype=int)
    return np.rint(np.arange(n) * (m - 1) / (n - 1)).astype(int)


def _descend(cost, start, choices):
    """Single-coordinate local search on a map"""
    f = np.array(start)
    value = cost(f)
    improved = True
    while improved and value > 0:
        improved = False
        for x in range(len(f)):
            keep = f[x]
            for y in range(choices):
                if y == keep:
                    continue
                f[x] = y
                trial = cost(f)
                if trial < value:
                    value, keep, improved = trial, y, True
            f[x] = keep
    return value, f


def gh(X, Y, exact_limit=None, restarts=4, rng=0):
    """Gromov-Hausdorff distance, half the least distortion

    Arguments:
        X, Y (FiniteMetricSpace): Spaces
        exact_limit (int, optional): Largest |X| |Y| searched
            exhaustively, defaults to `settings.ExactLimit`
        restarts (int, optional): Random starts of the local search
        rng (optional): Generator or seed of the random starts

    Returns:
        Bounds(lower, upper, exact, witness) with the pairs of the best
            correspondence found as witness

    """

    dx, dy = _dist(X), _dist(Y)
    n, m = len(dx), len(dy)
    limit = settings.ExactLimit if exact_limit is None else exact_limit

    if n * m <= limit:
        value, pairs = _search_correspondence(dx, dy)
        return Bounds(value / 2, value / 2, True, pairs)

    def cost(fg):
        return _pair_distortion(dx, dy,
                                np.concatenate((np.arange(n), fg[n:])),
                                np.concatenate((fg[:n], np.arange(m))))

    rng = as_generator(rng)
    starts = [np.concatenate((_index_map(n, m), _index_map(m, n)))]
    for _ in range(restarts):
        starts.append(np.concatenate((rng.integers(m, size=n),
                                      rng.integers(n, size=m))))

    best, witness = math.inf, None
    for start in starts:
        value, fg = _descend_pair(cost, start, n, m)
        if value < best:
            best, witness = value, fg
        if best == 0:
            break

    lower = _gh_lower(dx, dy) / 2
    pairs = sorted(set(
        list(zip(range(n), witness[:n].tolist())) +
        list(zip(witness[n:].tolist(), range(m)))))
    log.debug("gh bracket [%r, %r] from %d starts", lower, best / 2,
              len(starts))
    return Bounds(min(lower, best / 2), best / 2, False, pairs)


def _descend_pair(cost, start, n, m):
    fg = np.array(start)
    value = cost(fg)
    improved = True
    while improved and value > 0:
        improved = False
        for k in range(n + m):
            keep = fg[k]
            for choice in range(m if k < n else n):
                if choice == keep:
                    continue
                fg[k] = choice
                trial = cost(fg)
                if trial < value:
                    value, keep, improved = trial, choice, True
            fg[k] = keep
    return value, fg


def _as_integers(masses):
    """Exact integer rescaling of float masses (floats are dyadic)"""
    fractions = [Fraction(float(m)) for m in masses]
    scale = 1
    for fraction in fractions:
        scale = scale * fraction.denominator // \
            math.gcd(scale, fraction.denominator)
    return [int(f * scale) for f in fractions], scale


def _coupled(dist, mu, nu, radius):
    """Largest mass a coupling can keep within `radius`, by max flow"""
    graph = nx.DiGraph()
    for i, mass in enumerate(mu):
        if mass:
            graph.add_edge("source", ("x", i), capacity=mass)
    for j, mass in enumerate(nu):
        if mass:
            graph.add_edge(("y", j), "sink", capacity=mass)
    for i, j in zip(*np.nonzero(dist <= radius)):
        if mu[i] and nu[j]:
            graph.add_edge(("x", i), ("y", j))
    return nx.maximum_flow_value(graph, "source", "sink")


def prohorov(X, mu, nu):
    """Prohorov distance between two measures on the same space

    d_P(mu, nu) <= eps exactly when some coupling puts at most eps of
    mass on pairs further apart than eps. The uncoupled mass g(r) is a
    step function of r changing only at the distances of X, so the
    distance is min_k max(d_k, g(d_k)), found by bisection with a max
    flow per candidate radius in exact integer arithmetic.

    """

    dist = _dist(X)
    a, b = _masses(mu), _masses(nu)
    if len(a) != len(dist) or len(b) != len(dist):
        raise DomainError("Measures must live on the space")
    for masses in (a, b):
        if np.any(masses < 0) or abs(math.fsum(masses) - 1.0) > TOLERANCE:
            raise DomainError("Measures must be normalised")

    if np.array_equal(a, b):
        return 0.0

    integers, scale = _as_integers(np.concatenate((a, b)))
    mu_int, nu_int = integers[:len(a)], integers[len(a):]
    total = max(sum(mu_int), sum(nu_int))

    levels = np.unique(dist)
    cache = {}

    def uncoupled(k):
        if k not in cache:
            kept = _coupled(dist, mu_int, nu_int, levels[k])
            cache[k] = Fraction(total - kept, total)
        return cache[k]

    lo, hi = 0, len(levels) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if uncoupled(mid) <= Fraction(float(levels[mid])):
            hi = mid
        else:
            lo = mid + 1

    if lo == 0:
        return 0.0
    return float(min(Fraction(float(levels[lo])), uncoupled(lo - 1)))


def isometry_from_correspondence(X, Y, R, epsilon):
    """Map X -> Y built from a correspondence over an epsilon-net of X

    Net points are taken greedily in index order; each point of X goes
    to the partner of the first net point whose open epsilon-ball holds
    it. The result has dis(f) <= dis(R) + 2 eps and its image is a
    3 eps-net of Y.

    Raises:
        DomainError if dis(R) >= 2 epsilon

    """

    dx = _dist(X)
    pairs = list(R)
    if distortion(X, Y, pairs) >= 2 * epsilon:
        raise DomainError("Correspondence distortion must be below 2 eps")

    partner = {}
    for x, y in pairs:
        partner.setdefault(x, y)

    net = []
    for x in range(len(dx)):
        if not net or np.min(dx[x, net]) >= epsilon:
            net.append(x)

    f = np.empty(len(dx), dtype=int)
    for x in range(len(dx)):
        first = next(c for c in net if dx[x, c] < epsilon)
        f[x] = partner[first]
    return f


def pushforward_prohorov_check(X, Y, f, mu, nu):
    """d_P(f mu, f nu) against d_P(mu, nu) + dis(f)

    Returns:
        (lhs, rhs)

    Raises:
        AssertionError if lhs exceeds rhs

    """

    mu = mu if isinstance(mu, AtomicMeasure) else AtomicMeasure(mu)
    nu = nu if isinstance(nu, AtomicMeasure) else AtomicMeasure(nu)
    size = len(_dist(Y))

    lhs = prohorov(Y, mu.push(f, size), nu.push(f, size))
    rhs = prohorov(X, mu, nu) + map_distortion(X, Y, f)
    if lhs > rhs + TOLERANCE:
        raise AssertionError("Push-forward moved measures apart: %r > %r"
                             % (lhs, rhs))
    return lhs, rhs


def _isometry_cost(source, target):
    """c(f) = max(dis f, cover radius of f(X), d_P(f nu_X, nu_Y))"""
    dx, dy = source.dist, target.dist
    size = len(target)

    def cost(f, bound=math.inf):
        value = max(map_distortion(dx, dy, f), cover_radius(dy, f))
        if value >= bound:
            return value
        pushed = source.measure.push(f, size)
        return max(value, prohorov(dy, pushed, target.measure))

    return cost


def _best_map_exact(source, target):
    dx, dy = source.dist, target.dist
    n, m = len(dx), len(dy)
    cost = _isometry_cost(source, target)
    best = [math.inf, None]
    f = []

    def extend(current):
        if current >= best[0]:
            return
        if len(f) == n:
            value = cost(np.array(f), best[0])
            if value < best[0]:
                best[0], best[1] = value, list(f)
            return

        x = len(f)
        if f:
            costs = np.abs(dx[x, :x][None, :] - dy[:, f]).max(axis=1)
        else:
            costs = np.zeros(m)
        for y in np.argsort(costs, kind="stable"):
            f.append(int(y))
            extend(max(current, float(costs[y])))
            f.pop()

    extend(0.0)
    return best[0], best[1]


def _best_map_search(source, target, rng, restarts):
    n, m = len(source), len(target)
    cost = _isometry_cost(source, target)

    starts = []
    if n == m:
        starts.append(np.arange(n))
    starts.append(_index_map(n, m))
    for _ in range(restarts):
        starts.append(rng.integers(m, size=n))

    best, witness = math.inf, None
    for start in starts:
        value, f = _descend(cost, start, m)
        if value < best:
            best, witness = value, f.tolist()
        if best == 0:
            break
    return best, witness


def delta_ghwt(Xw, Yw, exact_limit=None, restarts=4, rng=0):
    """Delta_GHwt of two weighted finite spaces

    The infimum of eps admitting eps-isometries f: X -> Y and
    g: Y -> X whose push-forwards are within eps of the other measure.
    Feasibility of f and of g are separate and upward closed in eps, so
    the value is max(min_f c(f), min_g c(g)).

    Arguments:
        Xw, Yw (WeightedSpace): Spaces
        exact_limit (int, optional): Largest |Y|^|X| + |X|^|Y| searched
            exhaustively, defaults to `settings.MapLimit`

    Returns:
        Bounds(lower, upper, exact, witness) with witness {"f", "g"}

    """

    n, m = len(Xw), len(Yw)
    limit = settings.MapLimit if exact_limit is None else exact_limit

    if m ** n + n ** m <= limit:
        forward, f = _best_map_exact(Xw, Yw)
        backward, g = _best_map_exact(Yw, Xw)
        value = max(forward, backward)
        return Bounds(value, value, True, {"f": f, "g": g})

    rng = as_generator(rng)
    forward, f = _best_map_search(Xw, Yw, rng, restarts)
    backward, g = _best_map_search(Yw, Xw, rng, restarts)
    upper = max(forward, backward)

    # An eps-isometry gives a correspondence of distortion at most 3 eps
    lower = _gh_lower(Xw.dist, Yw.dist) / 3.0
    return Bounds(min(lower, upper), upper, False, {"f": f, "g": g})


def d_ghwt_bounds(Xw, Yw, exact_limit=None):
    """Bracket of the chained metric d_GHwt by powers of Delta_GHwt

    Returns:
        (lower, upper) as (Delta_lo ** 0.25 / 2, Delta_hi ** 0.25)

    """

    bounds = delta_ghwt(Xw, Yw, exact_limit)
    return 0.5 * bounds.lower ** 0.25, bounds.upper ** 0.25


def tree_to_space(tree, epsilon):
    """Finite weighted space of a tree

    Points are the vertices, the atom locations and an eps/2-net, with
    the tree's atoms as measure.

    Returns:
        WeightedSpace whose `refs` are the tree points used

    """

    refs = []
    seen = {}
    for ref in itertools.chain(
            (rtree.PointRef.at(v) for v in tree.vertices),
            (atom.at for atom in tree.atoms),
            rtree.eps_net(tree, epsilon / 2.0)):
        if ref not in seen:
            seen[ref] = len(refs)
            refs.append(ref)

    masses = np.zeros(len(refs))
    for atom in tree.atoms:
        masses[seen[atom.at]] += atom.mass

    dist = rtree.distance_matrix(tree, refs)
    dist = (dist + dist.T) / 2.0
    np.fill_diagonal(dist, 0.0)
    return WeightedSpace(dist, masses / math.fsum(masses), validate=False,
                         refs=refs)
