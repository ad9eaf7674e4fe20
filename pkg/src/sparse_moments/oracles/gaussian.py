"""Location mixtures of Gaussians with known covariance.

For ``x ~ N(mu, s^2)`` the scaled Hermite polynomial ``s^t He_t(x / s)``
has mean ``mu^t``, so averaging it over samples estimates the t-th moment
of the mixing distribution of the means. ``s`` is a standard deviation.
"""

import csv
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from ..errors import BadInput, DegenerateDirection
from ..highdim import QueryLog, check_query
from ..mixtures import Domain
from ..moments import MomentGrid2D, MomentVector1D, binom
from ..prony1d import make_rng

MAX_HERMITE = 64
VAR_FLOOR = 1e-12
SPECTRAL_CAP = 1e6


def hermite_coefficients(t):
    """Coefficients ``h[0..t]`` of the probabilists' Hermite polynomial He_t."""
    if not 0 <= t <= MAX_HERMITE:
        raise BadInput(f"Hermite degree must lie in [0, {MAX_HERMITE}]")
    h = [Fraction(0)] * (t + 1)
    for j in range(t // 2 + 1):
        h[t - 2 * j] = Fraction(factorial(t) * (-1) ** j, 2**j * factorial(j) * factorial(t - 2 * j))
    return np.array([float(c) for c in h])


def scaled_hermite(x, s, K):
    """Rows ``s^t He_t(x / s)`` for t = 0..K, via the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    P = np.empty((K + 1,) + x.shape)
    P[0] = 1.0
    if K >= 1:
        P[1] = x
    s2 = s * s
    for t in range(1, K):
        P[t + 1] = x * P[t] - t * s2 * P[t - 1]
    return P


def gaussian_moments_1d(samples, sigma, K):
    """Hermite moment estimates of the mean distribution and their variances.

    Returns ``(moments, var)`` where ``var[t]`` is the estimated variance of
    ``moments.values[t]`` (per-sample variance over n).
    """
    x = np.asarray(samples, dtype=float).reshape(-1)
    if sigma <= 0:
        raise BadInput("sigma must be > 0")
    if x.size < 1:
        raise BadInput("need at least one sample")
    P = scaled_hermite(x, sigma, K)
    vals = P.mean(axis=1)
    var = P.var(axis=1, ddof=1) / x.size if x.size > 1 else np.zeros(K + 1)
    vals[0], var[0] = 1.0, 0.0
    return MomentVector1D((K + 1) // 2, vals), var


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """Samples from a Gaussian location mixture with known covariance ``cov``.

    ``means`` and ``weights`` are kept only for synthetic data and are never
    read by the estimators.
    """

    cov: np.ndarray
    samples: np.ndarray
    means: np.ndarray = None
    weights: np.ndarray = None

    def __post_init__(self):
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        X = np.asarray(self.samples, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        d = cov.shape[0]
        if cov.shape != (d, d) or X.shape[1] != d:
            raise BadInput("cov must be d x d and samples n x d")
        if np.abs(cov - cov.T).max() > 1e-12:
            raise BadInput("covariance must be symmetric")
        eig = np.linalg.eigvalsh(cov)
        if eig[0] < -1e-12:
            raise BadInput("covariance must be positive semidefinite")
        if eig[-1] > SPECTRAL_CAP:
            raise BadInput(f"covariance spectral norm exceeds {SPECTRAL_CAP:g}")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "samples", X)

    @property
    def d(self):
        return self.cov.shape[0]

    @property
    def n(self):
        return self.samples.shape[0]

    def dump_samples(self, path):
        """CSV, one sample per row, no header, '.' decimal, LF line endings."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            for row in self.samples:
                w.writerow([repr(float(v)) for v in row])

    @staticmethod
    def load_samples(path):
        rows = []
        with open(path, encoding="utf-8", newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row:
                    continue
                try:
                    rows.append([float(v) for v in row])
                except ValueError:
                    raise BadInput(f"{path}:{lineno}: non-numeric entry") from None
        if not rows or len({len(r) for r in rows}) != 1:
            raise BadInput(f"{path}: empty file or ragged rows")
        return np.array(rows)


def sample_gaussian_mixture(means, weights, cov, n, rng):
    """n samples of ``N(mu_i, cov)`` with ``i ~ weights``; 1-D means may be a flat list."""
    rng = make_rng(rng)
    means = np.asarray(means, dtype=float)
    if means.ndim == 1:
        means = means[:, None]
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    z = rng.choice(len(weights), size=n, p=np.asarray(weights) / np.sum(weights))
    noise = rng.multivariate_normal(np.zeros(cov.shape[0]), cov, size=n, method="eigh")
    X = means[z] + noise
    return GaussianModel(cov, X, means, np.asarray(weights, dtype=float))


def gaussian_projected_moments(model, R, K):
    """Moments of ``R^T mu`` under the mixing distribution, with standard errors.

    For two columns the second direction is made Sigma-orthogonal to the
    first, so the two projected coordinates are independent given the
    component and the product of Hermite estimators is unbiased. The result
    is mapped back to the original pair of directions binomially.
    """
    R = np.asarray(R, dtype=float)
    if R.ndim == 1:
        R = R[:, None]
    if R.shape[0] != model.d or R.shape[1] not in (1, 2):
        raise BadInput(f"R must be {model.d} x 1 or {model.d} x 2")
    S = model.cov
    r1 = R[:, 0]
    v1 = float(r1 @ S @ r1)
    if v1 < VAR_FLOOR:
        raise DegenerateDirection(f"r^T Sigma r = {v1:g} is below {VAR_FLOOR:g}")
    u = model.samples @ r1
    if R.shape[1] == 1:
        M, var = gaussian_moments_1d(u, np.sqrt(v1), K)
        return M, np.sqrt(var)

    r2 = R[:, 1]
    rho = float(r1 @ S @ r2) / v1
    r2p = r2 - rho * r1
    v2 = float(r2p @ S @ r2p)
    v = model.samples @ r2p
    Pu = scaled_hermite(u, np.sqrt(v1), K)
    # a zero-variance direction is deterministic given the component
    Pv = scaled_hermite(v, np.sqrt(max(v2, 0.0)), K)
    n = u.size
    vals = np.full((K + 1, K + 1), np.nan)
    se = np.full_like(vals, np.nan)
    for t1 in range(K + 1):
        for t2 in range(K + 1 - t1):
            per = np.zeros(n)
            for i in range(t2 + 1):
                per += binom(t2, i) * rho**i * Pu[t1 + i] * Pv[t2 - i]
            vals[t1, t2] = per.mean()
            se[t1, t2] = per.std(ddof=1) / np.sqrt(n) if n > 1 else 0.0
    vals[0, 0], se[0, 0] = 1.0, 0.0
    return MomentGrid2D((K + 1) // 2, vals), se


class GaussianOracle:
    """Projected-moment oracle on the unit ball backed by Gaussian samples."""

    def __init__(self, model):
        self.model = model
        self.queries = QueryLog()

    @property
    def domain(self):
        return Domain.ball(self.model.d)

    def query(self, R, K):
        R = check_query(R, self.model.d)
        self.queries.append(R)
        return gaussian_projected_moments(self.model, R, K)[0]
