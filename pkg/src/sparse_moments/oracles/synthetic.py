"""Exact projected moments of a hidden mixture, optionally perturbed."""

import zlib

import numpy as np

from ..errors import BadInput
from ..highdim import QueryLog, check_query
from ..moments import MomentGrid2D, MomentVector1D, projected_moments

NOISE_MODES = ("none", "uniform", "adversarial")


def _perturb(values, xi, mode, rng):
    """Add entrywise noise of size <= xi to every moment except the mass."""
    out = np.array(values, dtype=float)
    if mode == "none" or xi == 0:
        return out
    mask = np.isfinite(out)
    mask.flat[0] = False
    if mode == "uniform":
        noise = rng.uniform(-xi, xi, size=out.shape)
    else:
        # alternate the sign with total degree: pushes the Hankel system
        # coherently away from the truth, the classic bad case for Prony
        deg = np.indices(out.shape).sum(axis=0)
        noise = np.where(deg % 2 == 1, xi, -xi)
    out[mask] += noise[mask]
    return out


def synthetic_moments(truth, R, K, noise_mode="none", xi=0.0, rng=None):
    """Moments of ``proj_R(truth)`` up to degree K, plus noise of size <= xi."""
    if noise_mode not in NOISE_MODES:
        raise BadInput(f"noise_mode must be one of {NOISE_MODES}")
    R = check_query(R, truth.dim)
    M = projected_moments(truth.locations, truth.weights, R, K)
    if noise_mode == "none":
        return M
    if rng is None:
        rng = np.random.Generator(np.random.Philox(0))
    vals = _perturb(M.values, xi, noise_mode, rng)
    cls = MomentVector1D if R.shape[1] == 1 else MomentGrid2D
    return cls(M.k, vals, xi)


class SyntheticOracle:
    """Answers projected-moment queries for a known mixture.

    The noise of each query is drawn from a stream keyed on ``(rng_seed, R)``
    so answers do not depend on the order in which threads ask.
    """

    def __init__(self, truth, noise_mode="none", xi=0.0, rng_seed=0):
        if noise_mode not in NOISE_MODES:
            raise BadInput(f"noise_mode must be one of {NOISE_MODES}")
        if xi < 0:
            raise BadInput("xi must be >= 0")
        self._truth = truth
        self.noise_mode = noise_mode
        self.xi = float(xi)
        self.rng_seed = int(rng_seed)
        self.queries = QueryLog()

    @property
    def domain(self):
        return self._truth.domain

    def query(self, R, K):
        R = check_query(R, self._truth.dim)
        self.queries.append(R)
        key = zlib.crc32(np.ascontiguousarray(R).tobytes())
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([self.rng_seed, key])))
        return synthetic_moments(self._truth, R, K, self.noise_mode, self.xi, rng)
