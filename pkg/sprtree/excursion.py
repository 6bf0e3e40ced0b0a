"""Piecewise-linear excursion paths and path surgery

An excursion is stored as its breakpoints (t_0 = 0 < ... < t_k = zeta)
and heights (v_0 = v_k = 0, interior heights positive), and evaluated by
linear interpolation. Every operation solves level crossings exactly on
the linear segments; no sampling grid is involved.

Attributes:
    TOLERANCE: Relative tolerance used for canonical form and equality

"""

import logging
from dataclasses import dataclass

import numpy as np

from .util import DomainError, EmptyExcisionError

log = logging.getLogger("sprtree")

TOLERANCE = 1e-12


class Excursion(object):
    """Piecewise-linear excursion in canonical form

    Canonical form merges collinear breakpoints and drops zero-length
    segments, so two excursions describing the same path compare equal
    breakpoint by breakpoint.

    Arguments:
        times (array-like): Breakpoint times, first one zero
        values (array-like): Heights at the breakpoints
        touching (bool, optional): Admit interior zeros. Only endpoint
            splices produce such paths.

    Raises:
        DomainError on paths violating the excursion invariants

    """

    __slots__ = ("times", "values", "touching")

    def __init__(self, times, values, touching=False):
        times = np.array(times, dtype=float)
        values = np.array(values, dtype=float)

        if times.ndim != 1 or times.shape != values.shape:
            raise DomainError("times and values must be 1-d of equal length")
        if len(times) < 2:
            raise DomainError("An excursion needs at least two breakpoints")
        if not np.all(np.isfinite(times)) or not np.all(np.isfinite(values)):
            raise DomainError("Breakpoints must be finite")

        zeta = times[-1] - times[0]
        if zeta <= 0:
            raise DomainError("Excursion length must be positive")

        vtol = TOLERANCE * max(1.0, float(np.max(np.abs(values))))
        if abs(times[0]) > TOLERANCE * zeta:
            raise DomainError("Excursions start at time 0, got %r" % times[0])
        if abs(values[0]) > vtol or abs(values[-1]) > vtol:
            raise DomainError("Excursions start and end at height 0")

        times[0] = 0.0
        values[0] = values[-1] = 0.0

        times, values = _canonical(times, values, vtol)

        interior = values[1:-1]
        if touching:
            if np.any(interior < -vtol):
                raise DomainError("Excursions are nonnegative")
            interior[interior < 0] = 0.0
        elif np.any(interior <= 0):
            raise DomainError("Interior heights must be strictly positive")

        if np.any(np.abs(np.diff(values)) <= vtol * 1e-3):
            raise DomainError("Flat segments are not allowed")

        times.setflags(write=False)
        values.setflags(write=False)

        self.times = times
        self.values = values
        self.touching = bool(touching and np.any(interior == 0))

    def __repr__(self):
        return "%s.%s(length=%r, breakpoints=%d, max=%r)" % (
            __name__, type(self).__name__,
            self.length, len(self.times), self.max)

    def __len__(self):
        return len(self.times)

    def __call__(self, t):
        return evaluate(self, t)

    @property
    def length(self):
        """zeta(e)"""
        return float(self.times[-1])

    @property
    def max(self):
        return float(np.max(self.values))

    @property
    def argmax(self):
        return float(self.times[int(np.argmax(self.values))])

    def allclose(self, other, tol=TOLERANCE):
        """Breakpoint-list equality up to `tol`"""
        if len(self) != len(other):
            return False
        scale = max(1.0, self.length, self.max)
        return bool(
            np.all(np.abs(self.times - other.times) <= tol * scale) and
            np.all(np.abs(self.values - other.values) <= tol * scale)
        )


@dataclass(frozen=True)
class GammaPoint(object):
    """A point (s, a) under the graph of an excursion

    s_lo and s_hi are the start and finish of the excursion
    above level a that straddles time s.

    """

    s: float
    a: float
    s_lo: float
    s_hi: float

    @property
    def width(self):
        return self.s_hi - self.s_lo


def _canonical(times, values, vtol):
    gaps = np.diff(times)
    if np.any(gaps < 0):
        raise DomainError("Breakpoint times must be increasing")

    # Zero-length segments
    tiny = TOLERANCE * times[-1]
    if np.any(gaps <= tiny):
        keep = np.ones(len(times), dtype=bool)
        keep[1:-1] = gaps[:-1] > tiny
        if len(times) > 2 and gaps[-1] <= tiny:
            keep[-2] = False
        times, values = times[keep], values[keep]
        if np.any(np.diff(times) <= 0):
            raise DomainError("Breakpoint times must be strictly increasing")

    # Collinear breakpoints, measured as height off the chord
    if len(times) > 2:
        t0, t1, t2 = times[:-2], times[1:-1], times[2:]
        v0, v1, v2 = values[:-2], values[1:-1], values[2:]
        chord = v0 + (v2 - v0) * (t1 - t0) / (t2 - t0)
        merged = np.abs(v1 - chord) <= vtol
        if np.any(merged):
            keep = np.ones(len(times), dtype=bool)
            keep[1:-1] = ~merged
            times, values = times[keep], values[keep]

    return times.copy(), values.copy()


def _tiny(e):
    return TOLERANCE * max(1.0, e.length)


def evaluate(e, t):
    """Height of `e` at time(s) `t` by linear interpolation

    Arguments:
        e (Excursion): Path to evaluate
        t (float or array): Time(s) in [0, zeta]

    Raises:
        DomainError if any `t` lies outside [0, zeta]

    """

    arr = np.asarray(t, dtype=float)
    tiny = _tiny(e)
    if np.any(arr < -tiny) or np.any(arr > e.length + tiny):
        raise DomainError("Time outside [0, %r]" % e.length)

    result = np.interp(arr, e.times, e.values)
    if result.ndim == 0:
        return float(result)
    return result


def rescale(e, c):
    """Brownian rescaling S_c e := sqrt(c) e(./c)"""
    if not c > 0:
        raise DomainError("Scale must be positive, got %r" % c)
    return Excursion(e.times * c, e.values * np.sqrt(c), touching=e.touching)


def dilate(e, c):
    """Vertical scaling t -> c e(t), as in T_{2e}"""
    if not c > 0:
        raise DomainError("Factor must be positive, got %r" % c)
    return Excursion(e.times, e.values * c, touching=e.touching)


def normalize(e):
    """Rescale `e` to unit length"""
    return rescale(e, 1.0 / e.length)


def straddle(e, s, a):
    """The excursion of `e` above level `a` that straddles time `s`

    s_lo = sup{r < s : e(r) < a} (0 if none) and
    s_hi = inf{t > s : e(t) < a} (zeta if none), solved exactly on
    the linear segments.

    Arguments:
        e (Excursion): Path
        s (float): Time in (0, zeta)
        a (float): Level in [0, e(s)]

    Returns:
        GammaPoint

    Raises:
        DomainError if (s, a) is not under the graph of `e`

    """

    zeta = e.length
    if not 0 < s < zeta:
        raise DomainError("Straddle time %r outside (0, %r)" % (s, zeta))

    h = evaluate(e, s)
    if a < 0 or a > h + TOLERANCE * max(1.0, e.max):
        raise DomainError("Level %r outside [0, e(s)=%r]" % (a, h))
    a = min(float(a), h)

    t, v = e.times, e.values

    # Left: last breakpoint at or before s strictly below a
    i = int(np.searchsorted(t, s, side="right")) - 1
    below = np.flatnonzero(v[:i + 1] < a)
    if len(below) == 0:
        s_lo = 0.0
    else:
        j = below[-1]
        if j + 1 <= i:
            rt, rv = t[j + 1], v[j + 1]
        else:
            rt, rv = s, h
        s_lo = t[j] + (a - v[j]) * (rt - t[j]) / (rv - v[j])

    # Right: first breakpoint at or after s strictly below a
    i = int(np.searchsorted(t, s, side="left"))
    below = np.flatnonzero(v[i:] < a)
    if len(below) == 0:
        s_hi = zeta
    else:
        j = i + below[0]
        if j - 1 >= i:
            lt, lv = t[j - 1], v[j - 1]
        else:
            lt, lv = s, h
        s_hi = lt + (lv - a) * (t[j] - lt) / (lv - v[j])

    return GammaPoint(float(s), a, float(min(s_lo, s)), float(max(s_hi, s)))


def excise(e, gp):
    """Split `e` into the subexcursion above `gp` and the remainder

    Arguments:
        e (Excursion): Path
        gp (GammaPoint): Straddle of `e`

    Returns:
        (e_hat, e_check): The excursion above (s, a) shifted to start at
            time and height zero, and `e` with [s_lo, s_hi] cut out and
            the gap closed.

    Raises:
        EmptyExcisionError when the straddle is degenerate or covers
            the whole path (a = 0)

    """

    tiny = _tiny(e)
    s_lo, s_hi, a = gp.s_lo, gp.s_hi, gp.a
    if a <= 0 or (s_lo <= tiny and s_hi >= e.length - tiny):
        raise EmptyExcisionError("Excising at level 0 leaves nothing behind")
    if s_hi - s_lo <= tiny:
        raise EmptyExcisionError("Straddle at (%r, %r) has zero length"
                                 % (gp.s, a))

    t, v = e.times, e.values
    width = s_hi - s_lo

    inner = (t > s_lo + tiny) & (t < s_hi - tiny)
    e_hat = Excursion(
        np.concatenate(([0.0], t[inner] - s_lo, [width])),
        np.concatenate(([0.0], v[inner] - a, [0.0])),
        touching=True,
    )

    before = t < s_lo - tiny
    after = t > s_hi + tiny
    e_check = Excursion(
        np.concatenate((t[before], [s_lo], t[after] - width)),
        np.concatenate((v[before], [a], v[after])),
        touching=e.touching,
    )

    return e_hat, e_check


def _splice(host, guest, at):
    """Ride `guest` on top of `host` from time `at` onwards"""
    tiny = _tiny(host)
    h = evaluate(host, at)
    th, vh = host.times, host.values
    before = th < at - tiny
    after = th > at + tiny
    w = guest.length

    times = np.concatenate((
        th[before], [at], guest.times[1:-1] + at, [at + w], th[after] + w))
    values = np.concatenate((
        vh[before], [h], guest.values[1:-1] + h, [h], vh[after]))

    return times, values, h


def insert(e_prime, e_dprime, u, rho):
    """Insert rescaled `e_prime` into rescaled `e_dprime`

    Runs S_{1-rho} e'' up to time (1 - rho) u, then
    S_rho e' riding at the height reached, then the rest of S_{1-rho} e''.

    Arguments:
        e_prime (Excursion): Unit-length excursion to insert
        e_dprime (Excursion): Unit-length host excursion
        u (float): Insertion position as a fraction of the host, in [0, 1]
        rho (float): Length given to the inserted excursion, in (0, 1)

    Returns:
        Excursion of unit length. With u in {0, 1} the result is a
        concatenation touching zero at the splice.

    """

    for name, e in (("e_prime", e_prime), ("e_dprime", e_dprime)):
        if abs(e.length - 1.0) > 1e-9:
            raise DomainError("%s must have unit length, got %r"
                              % (name, e.length))
    if not 0 < rho < 1:
        raise DomainError("rho must lie in (0, 1), got %r" % rho)
    if not 0 <= u <= 1:
        raise DomainError("u must lie in [0, 1], got %r" % u)

    host = rescale(e_dprime, 1.0 - rho)
    guest = rescale(e_prime, rho)
    times, values, h = _splice(host, guest, (1.0 - rho) * u)
    times[-1] = 1.0

    touching = h <= 0 or host.touching or guest.touching
    return Excursion(times, values, touching=touching)


def path_spr(e, gp, v):
    """Excise the excursion above `gp` and regraft it at time `v`

    The raw (unrescaled) e_hat is spliced into e_check at time `v`,
    riding at height e_check(v). Length is preserved.

    Arguments:
        e (Excursion): Path
        gp (GammaPoint): Straddle of `e`
        v (float): Time in [0, zeta(e_check)]

    """

    e_hat, e_check = excise(e, gp)
    tiny = _tiny(e)
    if not -tiny <= v <= e_check.length + tiny:
        raise DomainError("Regraft time %r outside [0, %r]"
                          % (v, e_check.length))
    v = min(max(v, 0.0), e_check.length)

    times, values, h = _splice(e_check, e_hat, v)
    times[-1] = e.length

    return Excursion(times, values, touching=h <= 0 or e_check.touching)


def rearrangement(e, gp, v):
    """Time correspondence from `e` to `path_spr(e, gp, v)`

    Returns:
        callable mapping an array of times of `e` to the times of the
            same tree points in the rearranged path.

    """

    s_lo, s_hi = gp.s_lo, gp.s_hi
    width = s_hi - s_lo

    def phi(t):
        t = np.asarray(t, dtype=float)
        inside = (t > s_lo) & (t < s_hi)
        tau = np.where(t <= s_lo, t, t - width)
        moved = np.where(tau <= v, tau, tau + width)
        return np.where(inside, v + (t - s_lo), moved)

    return phi


def level_starts(e, a):
    """Starting times of the excursions of `e` above level `a`

    These are the left endpoints of the components of {e > a}.

    """

    if a < 0:
        raise DomainError("Level must be nonnegative, got %r" % a)

    t, v = e.times, e.values
    lo, hi = v[:-1], v[1:]
    up = (lo <= a) & (hi > a)
    t0, t1 = t[:-1][up], t[1:][up]
    return list(t0 + (a - lo[up]) * (t1 - t0) / (hi[up] - lo[up]))


def excursions_above(e, a):
    """Intervals (start, finish) of the components of {e > a}"""
    if a < 0:
        raise DomainError("Level must be nonnegative, got %r" % a)

    t, v = e.times, e.values
    lo, hi = v[:-1], v[1:]
    down = (lo > a) & (hi <= a)
    t0, t1 = t[:-1][down], t[1:][down]
    ends = t0 + (lo[down] - a) * (t1 - t0) / (lo[down] - hi[down])

    return list(zip(level_starts(e, a), ends))


def tree_distance(e, s, t):
    """d_e(s, t) = e(s) + e(t) - 2 min over [s, t] of e"""
    if s > t:
        s, t = t, s
    es, et = evaluate(e, s), evaluate(e, t)
    inside = e.values[(e.times > s) & (e.times < t)]
    low = min(es, et, float(inside.min()) if len(inside) else es)
    return es + et - 2.0 * low
