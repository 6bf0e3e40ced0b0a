import sys

# User-editable settings

Steps = 1000            # Lattice resolution n of sampled excursions
WeightGrid = 512        # Atoms m of the discretised weight
Method = "dyck"         # Excursion sampler, "dyck" or "bridge-vervaat"
Seed = 7                # Master seed when none is given
RhoMin = 0.01           # Truncation of the rho density for paired samples
ExactLimit = 16         # |X|*|Y| up to which correspondence search is exhaustive
MapLimit = 4096         # |Y|^|X| + |X|^|Y| up to which map search is exhaustive
Threads = 1
TimeScale = 1.0         # Multiplier on the jump rate of the SPR chain
ZThreshold = 3.0
Samples = 2000
ChunkSize = 64          # Monte Carlo replicas per seed stream
NetEpsilon = 0.25
Tolerance = 1e-12

# Implementation details below.

self = sys.modules[__name__]

_keys = (
    "Steps",
    "WeightGrid",
    "Method",
    "Seed",
    "RhoMin",
    "ExactLimit",
    "MapLimit",
    "Threads",
    "TimeScale",
    "ZThreshold",
    "Samples",
    "ChunkSize",
    "NetEpsilon",
    "Tolerance",
)


def from_dict(settings):
    """Apply settings from dictionary

    Arguments:
        settings (dict): Settings in the form of a dictionary

    """

    assert isinstance(settings, dict), "`settings` must be of type dict"
    for key, value in settings.items():
        if key not in _keys:
            raise KeyError("Unknown setting: %s" % key)
        setattr(self, key, value)


def to_dict():
    """Return dictionary of settings"""
    return dict((k, getattr(self, k)) for k in _keys)
