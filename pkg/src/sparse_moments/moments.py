"""Moment containers and moment algebra.

Indices are 0-based. A 2-D grid is a dense (K+1, K+1) array holding
``M[i, j] = E[a^i b^j]`` for ``i + j <= K`` and NaN elsewhere.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import BadInput, MissingMoment

MAX_BINOM_N = 64


def binom(n, r):
    """Exact binomial coefficient; refuses n > 64 to stay inside int64."""
    if n > MAX_BINOM_N:
        raise BadInput(f"binomial C({n}, {r}) exceeds the exact int64 range")
    return comb(n, r)


def _unit_mass(m0):
    if abs(m0 - 1.0) > 1e-6:
        raise BadInput(f"zeroth moment must be 1, got {m0!r}")
    return 1.0


def _readonly(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MomentVector1D:
    """Moments ``M_0..M_K`` of a measure on the line, with noise bound ``xi``."""

    k: int
    values: np.ndarray
    noise_bound: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.size < 1:
            raise BadInput("empty moment vector")
        v = v.copy()
        v[0] = _unit_mass(v[0])
        object.__setattr__(self, "values", _readonly(v))
        if self.noise_bound < 0:
            raise BadInput("noise bound must be nonnegative")

    @property
    def K(self):
        return self.values.size - 1

    def require(self, K):
        if self.K < K:
            raise MissingMoment(self.K + 1)

    def to_dict(self):
        return {
            "k": self.k,
            "kind": "1d",
            "noise_bound": self.noise_bound,
            "values": {str(t): float(v) for t, v in enumerate(self.values)},
        }


@dataclass(frozen=True, eq=False)
class MomentGrid2D:
    """Mixed moments ``M[i, j]`` for ``i + j <= K``."""

    k: int
    values: np.ndarray
    noise_bound: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise BadInput("moment grid must be a square array")
        v[0, 0] = _unit_mass(v[0, 0])
        object.__setattr__(self, "values", _readonly(v))

    @property
    def K(self):
        return self.values.shape[0] - 1

    def __getitem__(self, ij):
        i, j = ij
        if i + j > self.K or i < 0 or j < 0:
            raise MissingMoment(i, j)
        v = self.values[i, j]
        if np.isnan(v):
            raise MissingMoment(i, j)
        return float(v)

    def require(self, K):
        if self.K < K:
            raise MissingMoment(K, 0)
        for i in range(K + 1):
            for j in range(K + 1 - i):
                if not np.isfinite(self.values[i, j]):
                    raise MissingMoment(i, j)

    def swapped(self):
        """Grid of the mixture with its two coordinates exchanged."""
        return MomentGrid2D(self.k, self.values.T, self.noise_bound)

    def to_dict(self):
        vals = {}
        for i in range(self.K + 1):
            for j in range(self.K + 1 - i):
                if np.isfinite(self.values[i, j]):
                    vals[f"{i},{j}"] = float(self.values[i, j])
        return {"k": self.k, "kind": "2d", "noise_bound": self.noise_bound, "values": vals}


@dataclass(frozen=True, eq=False)
class ConjugateMomentGrid:
    """``G[i, j] = E[conj(beta)^i beta^j]`` for ``0 <= i <= k``, ``0 <= j < k``."""

    k: int
    values: np.ndarray
    noise_bound: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.k + 1, self.k):
            raise BadInput(f"conjugate grid must be {(self.k + 1, self.k)}")
        v[0, 0] = _unit_mass(v[0, 0])
        object.__setattr__(self, "values", _readonly(v))

    def __getitem__(self, ij):
        """Any (i, j) with i, j <= k except (k, k), using conjugate symmetry."""
        i, j = ij
        if 0 <= i <= self.k and 0 <= j < self.k:
            return complex(self.values[i, j])
        if 0 <= j <= self.k and 0 <= i < self.k:
            return complex(np.conj(self.values[j, i]))
        raise MissingMoment(i, j)

    def to_dict(self):
        vals = {
            f"{i},{j}": [float(z.real), float(z.imag)]
            for (i, j), z in np.ndenumerate(self.values)
        }
        return {
            "k": self.k,
            "kind": "conjugate",
            "noise_bound": self.noise_bound,
            "values": vals,
        }


@dataclass(frozen=True, eq=False)
class HankelSystem:
    A: np.ndarray
    b: np.ndarray


@dataclass(frozen=True, eq=False)
class VandermondeSystem:
    V: np.ndarray


def moments_from_dict(data):
    """Inverse of ``to_dict`` for the three moment containers."""
    try:
        kind = data["kind"]
        k = int(data["k"])
        xi = float(data.get("noise_bound", 0.0))
        vals = data["values"]
        if kind == "1d":
            K = max(int(t) for t in vals)
            arr = np.full(K + 1, np.nan)
            for t, v in vals.items():
                arr[int(t)] = float(v)
            if np.isnan(arr).any():
                raise MissingMoment(int(np.nonzero(np.isnan(arr))[0][0]))
            return MomentVector1D(k, arr, xi)
        if kind == "2d":
            idx = [tuple(int(s) for s in key.split(",")) for key in vals]
            K = max(i + j for i, j in idx)
            arr = np.full((K + 1, K + 1), np.nan)
            for (i, j), v in zip(idx, vals.values()):
                arr[i, j] = float(v)
            grid = MomentGrid2D(k, arr, xi)
            grid.require(K)
            return grid
        if kind == "conjugate":
            arr = np.zeros((k + 1, k), dtype=complex)
            seen = np.zeros((k + 1, k), dtype=bool)
            for key, (re, im) in vals.items():
                i, j = (int(s) for s in key.split(","))
                arr[i, j] = complex(re, im)
                seen[i, j] = True
            if not seen.all():
                i, j = np.argwhere(~seen)[0]
                raise MissingMoment(int(i), int(j))
            return ConjugateMomentGrid(k, arr, xi)
    except (KeyError, TypeError, ValueError) as exc:
        raise BadInput(f"bad moment record: {exc}") from exc
    raise BadInput(f"unknown moment kind {data.get('kind')!r}")


# ---------------------------------------------------------------------------
# exact moments
# ---------------------------------------------------------------------------


def power_moments_1d(x, w, K):
    """``sum_i w_i x_i^t`` for t = 0..K (real or complex inputs)."""
    x = np.asarray(x).reshape(-1)
    w = np.asarray(w).reshape(-1)
    powers = x[None, :] ** np.arange(K + 1)[:, None]
    return powers @ w


def power_moments_2d(points, w, K):
    """Dense (K+1, K+1) grid of mixed moments, NaN beyond total degree K."""
    pts = np.asarray(points, dtype=float)
    w = np.asarray(w, dtype=float)
    t = np.arange(K + 1)
    pa = pts[:, 0][None, :] ** t[:, None]
    pb = pts[:, 1][None, :] ** t[:, None]
    grid = (pa * w) @ pb.T
    i, j = np.indices(grid.shape)
    grid[i + j > K] = np.nan
    return grid


def moments_1d(m, K):
    """Exact moments M_0..M_K of a 1-D mixture."""
    if K < 1:
        raise BadInput("K must be >= 1")
    vals = power_moments_1d(m.locations[:, 0], m.weights, K)
    return MomentVector1D((K + 1) // 2, vals, 0.0)


def moments_2d(m, K):
    """Exact mixed moments of a 2-D mixture up to total degree K."""
    if K < 1:
        raise BadInput("K must be >= 1")
    if m.locations.shape[1] != 2:
        raise BadInput("moments_2d needs a 2-D mixture")
    return MomentGrid2D((K + 1) // 2, power_moments_2d(m.locations, m.weights, K), 0.0)


def projected_moments(points, weights, R, K):
    """Moments of the pushforward ``x -> R^T x``; R has 1 or 2 columns."""
    R = np.asarray(R, dtype=float)
    if R.ndim == 1:
        R = R[:, None]
    proj = np.asarray(points, dtype=float) @ R
    k = (K + 1) // 2
    if R.shape[1] == 1:
        return MomentVector1D(k, power_moments_1d(proj[:, 0], weights, K))
    if R.shape[1] == 2:
        return MomentGrid2D(k, power_moments_2d(proj, weights, K))
    raise BadInput("projection must have 1 or 2 columns")


def conjugate_moments_direct(beta, w, k):
    """``G[i, j] = sum_t w_t conj(beta_t)^i beta_t^j`` computed from the support."""
    beta = np.asarray(beta, dtype=complex)
    w = np.asarray(w)
    ci = np.conj(beta)[None, :] ** np.arange(k + 1)[:, None]
    cj = beta[None, :] ** np.arange(k)[:, None]
    return (ci * w) @ cj.T


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------


def complex_transform(M, k=None):
    """Real mixed moments to conjugate moments of ``beta = a + b i``.

    Expands ``(a - b i)^i (a + b i)^j`` binomially, so each ``G[i, j]`` is a
    bilinear form in the anti-diagonal of M with total degree i + j.
    """
    k = M.k if k is None else k
    M.require(2 * k - 1)
    vals = M.values
    G = np.zeros((k + 1, k), dtype=complex)
    for i in range(k + 1):
        u = np.array([binom(i, p) * (-1j) ** (i - p) for p in range(i + 1)])
        for j in range(k):
            v = np.array([binom(j, q) * (1j) ** (j - q) for q in range(j + 1)])
            n = i + j
            p = np.arange(i + 1)[:, None]
            q = np.arange(j + 1)[None, :]
            N = vals[p + q, n - p - q]
            G[i, j] = u @ N @ v
    # noise on M can grow by at most 2^(i+j) <= 2^(2k-1)
    return ConjugateMomentGrid(k, G, M.noise_bound * 2.0 ** (2 * k - 1))


def affine_moments_1d(M, scale, shift):
    """Moments of ``scale * y + shift`` from the moments of y."""
    K = M.K
    v = M.values
    out = np.zeros(K + 1)
    for t in range(K + 1):
        out[t] = sum(
            binom(t, i) * scale**i * shift ** (t - i) * v[i] for i in range(t + 1)
        )
    growth = max((abs(scale) + abs(shift)) ** t for t in range(K + 1))
    return MomentVector1D(M.k, out, M.noise_bound * growth)


def affine_moments_2d(M, scale, shift):
    """Moments of the coordinate-wise affine map ``(s0 a + c0, s1 b + c1)``."""
    K = M.K
    M.require(K)
    v = M.values
    (s0, s1), (c0, c1) = scale, shift
    out = np.full((K + 1, K + 1), np.nan)
    for t1 in range(K + 1):
        for t2 in range(K + 1 - t1):
            acc = 0.0
            for i in range(t1 + 1):
                fa = binom(t1, i) * s0**i * c0 ** (t1 - i)
                for j in range(t2 + 1):
                    acc += fa * binom(t2, j) * s1**j * c1 ** (t2 - j) * v[i, j]
            out[t1, t2] = acc
    g0 = abs(s0) + abs(c0)
    g1 = abs(s1) + abs(c1)
    growth = max(g0**a * g1**b for a in range(K + 1) for b in range(K + 1 - a))
    return MomentGrid2D(M.k, out, M.noise_bound * growth)


# ---------------------------------------------------------------------------
# linear systems
# ---------------------------------------------------------------------------


def _hankel_values(values, k):
    vals = list(values)
    if len(vals) < 2 * k:
        raise MissingMoment(len(vals))
    exact = any(isinstance(v, Fraction) for v in vals)
    arr = np.array(vals[: 2 * k], dtype=object if exact else float)
    idx = np.arange(k)
    A = arr[idx[:, None] + idx[None, :]]
    b = arr[idx + k]
    return HankelSystem(A, b)


def build_hankel(M, k=None):
    """Hankel system whose solution is the characteristic polynomial.

    Real case: ``A[i, j] = M[i + j]``, ``b[i] = M[i + k]``. Conjugate case:
    ``A[i, j] = G[i, j]``, ``b[i] = G[i, k]``. A plain sequence of moments
    (floats or Fractions) is accepted as the real case.
    """
    if isinstance(M, ConjugateMomentGrid):
        k = M.k if k is None else k
        A = np.array(M.values[:k, :k])
        b = np.array([M[i, k] for i in range(k)])
        return HankelSystem(A, b)
    if isinstance(M, MomentVector1D):
        k = M.k if k is None else k
        return _hankel_values(M.values, k)
    if k is None:
        k = len(M) // 2
    return _hankel_values(M, k)


def build_vandermonde(nodes, rows):
    """``V[t, j] = nodes[j] ** t`` for t = 0..rows-1."""
    nodes = np.asarray(nodes).reshape(-1)
    if not np.all(np.isfinite(nodes)):
        raise BadInput("non-finite Vandermonde node")
    V = nodes[None, :] ** np.arange(rows)[:, None]
    return VandermondeSystem(V)


def moment_distance(Ma, Mb, K=None):
    """L-infinity distance over all stored moments of total degree <= K."""
    a = getattr(Ma, "values", Ma)
    b = getattr(Mb, "values", Mb)
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise BadInput(f"moment shapes differ: {a.shape} vs {b.shape}")
    if a.ndim == 1:
        K = a.size - 1 if K is None else K
        return float(np.max(np.abs(a[: K + 1] - b[: K + 1])))
    i, j = np.indices(a.shape)
    mask = np.ones(a.shape, dtype=bool) if K is None else (i + j <= K)
    diff = np.abs(a - b)[mask]
    diff = diff[np.isfinite(diff)]
    return float(diff.max()) if diff.size else 0.0
