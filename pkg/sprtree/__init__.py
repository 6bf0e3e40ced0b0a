from .version import (
    version,
    version_info,
    __version__
)


def sample(steps=None, weight_grid=None, seed=None, method=None):
    """Sample a continuum random tree T_{2e}"""
    from . import sampler
    cfg = sampler.SamplerConfig(steps, weight_grid, seed, method)
    return sampler.sample_crt(cfg)


def check(id, samples=None, **params):
    """Monte Carlo estimate of a closed form, e.g. check("mass_beta_mean", beta=1)"""
    from . import verify
    return verify.mc_estimate(id, params, samples=samples)


__all__ = [
    "__version__",
    "version",
    "version_info",
    "sample",
    "check",
]
