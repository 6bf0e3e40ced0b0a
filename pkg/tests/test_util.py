import math

import numpy as np
import pytest

from sprtree import util, settings

from . import lib


def test_item_list():
    """ItemList looks items up by key as well as by index"""

    class Item(object):
        def __init__(self, id):
            self.id = id

    items = util.ItemList("id", [Item("a"), Item("b")])
    assert items[1].id == "b"
    assert items["a"] is items[0]
    assert items.get("c") is None
    assert items.keys() == ["a", "b"]

    with pytest.raises(KeyError):
        items["c"]


def test_timer_records_elapsed():
    """util.Timer exposes the elapsed time after the block"""
    with util.Timer("took %.3f s") as timer:
        sum(range(1000))
    assert timer.elapsed >= 0


def test_seed_streams_are_stable():
    """Stream i does not depend on how many streams are spawned"""
    few = util.seed_streams(7, 2)
    many = util.seed_streams(7, 5)
    assert few[1].random() == many[1].random()
    assert util.seed_streams(7, 1)[0].random() != \
        util.seed_streams(8, 1)[0].random()


def _draw(rng):
    return [rng.random() for _ in range(3)]


def test_parallel_is_independent_of_threads():
    """util.parallel returns the same ordered results for any width"""
    serial = util.parallel(_draw, util.seed_streams(3, 6), threads=1)
    threaded = util.parallel(_draw, util.seed_streams(3, 6), threads=3,
                             backend="threading")
    assert serial == threaded


def test_chunked():
    """util.chunked splits a total into consecutive sizes"""
    assert util.chunked(10, 4) == [4, 4, 2]
    assert util.chunked(8, 4) == [4, 4]
    assert util.chunked(3, 4) == [3]


def test_stable_mean():
    """util.stable_mean returns mean and standard error"""
    mean, error = util.stable_mean([1.0, 2.0, 3.0, 4.0])
    assert mean == 2.5
    assert error == pytest.approx(math.sqrt(5.0 / 3 / 4))

    mean, error = util.stable_mean([5.0])
    assert mean == 5.0
    assert math.isnan(error)

    with pytest.raises(util.DomainError):
        util.stable_mean([])


def test_as_generator():
    """util.as_generator passes generators through and seeds the rest"""
    rng = np.random.default_rng(1)
    assert util.as_generator(rng) is rng
    assert util.as_generator(4).random() == util.as_generator(4).random()


def test_settings_round_trip():
    """settings.from_dict applies known keys and rejects others"""
    try:
        settings.from_dict({"Steps": 50})
        assert settings.Steps == 50
        assert settings.to_dict()["Steps"] == 50

        with pytest.raises(KeyError):
            settings.from_dict({"NoSuchSetting": 1})
    finally:
        lib.clean()

    assert settings.Steps == lib.DEFAULTS["Steps"]
