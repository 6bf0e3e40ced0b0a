import math
import time
import logging

import numpy as np
from joblib import Parallel, delayed

log = logging.getLogger("sprtree")


class DomainError(ValueError):
    """An argument lies outside the domain of an operation"""


class EmptyExcisionError(DomainError):
    """The excursion above a level has zero length, or is the whole path"""


class InputError(ValueError):
    """A file or document could not be understood"""


class ItemList(list):
    """List with keys

    Raises:
        KeyError is item is not in list

    Example:
        >>> Obj = type("Object", (object,), {})
        >>> obj = Obj()
        >>> obj.id = "Test"
        >>> l = ItemList(key="id")
        >>> l.append(obj)
        >>> l[0] == obj
        True
        >>> l["Test"] == obj
        True
        >>> try:
        ...   l["NotInList"]
        ... except KeyError:
        ...   print(True)
        True

    """

    def __init__(self, key, items=()):
        super(ItemList, self).__init__(items)
        self.key = key

    def __getitem__(self, index):
        if isinstance(index, (int, slice)):
            return super(ItemList, self).__getitem__(index)

        for item in self:
            if getattr(item, self.key) == index:
                return item

        raise KeyError("%s not in list" % index)

    def get(self, key, default=None):
        try:
            return self.__getitem__(key)
        except KeyError:
            return default

    def keys(self):
        return [getattr(item, self.key) for item in self]


class Timer(object):
    """Time operations using this context manager

    The elapsed time, in seconds, is available as `elapsed`
    once the block has finished.

    Arguments:
        format (str): Optional format for the log message.
            Defaults to "%.3f s"

    """

    def __init__(self, format=None):
        self._format = format or "%.3f s"
        self.elapsed = 0.0

    def __enter__(self):
        self._time = time.perf_counter()
        return self

    def __exit__(self, type, value, tb):
        self.elapsed = time.perf_counter() - self._time
        log.info(self._format % self.elapsed)


def seed_streams(seed, count):
    """Derive `count` independent generators from a master seed

    Stream i is always child i of the master SeedSequence,
    so a replica draws the same numbers whichever worker runs it.

    Arguments:
        seed (int): Master seed
        count (int): Number of streams

    Returns:
        list of numpy.random.Generator

    """

    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def as_generator(rng):
    """Accept a Generator, a seed or None"""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def parallel(func, items, threads=1, backend="loky"):
    """Map `func` over `items`, preserving order

    Results do not depend on `threads`: each item carries
    its own seed stream and results come back in input order.

    Arguments:
        func (callable): Called once per item
        items (list): Arguments to `func`
        threads (int, optional): Number of workers, 1 runs in-process
        backend (str, optional): joblib backend

    """

    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    return Parallel(n_jobs=threads, backend=backend)(
        delayed(func)(item) for item in items
    )


def chunked(total, size):
    """Split `total` replicas into consecutive chunk sizes"""
    sizes = [size] * (total // size)
    if total % size:
        sizes.append(total % size)
    return sizes


def stable_mean(values):
    """Order-stable mean and standard error of a sequence"""
    values = [float(v) for v in values]
    n = len(values)
    if n == 0:
        raise DomainError("No samples")

    mean = math.fsum(values) / n
    if n == 1:
        return mean, float("nan")

    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)
