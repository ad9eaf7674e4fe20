"""Spike mixtures, domain projections and transportation distances.

All transports use an L1 ground metric unless ``metric="l2"`` is asked for.
The general solver is successive shortest paths on the complete bipartite
graph (see ``_kernels``); the 1-D distance integrates ``|F_a - F_b|``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from . import _kernels
from .errors import BadInput, DomainMismatch, Infeasible, TooLarge

TAU_DOM = 1e-9
TAU_W = 1e-12
SUM_TOL = 1e-9
MAX_SPIKES = 512
# points this close to the boundary already count as projected, which keeps
# projection idempotent under rounding
PROJ_EPS = 4 * np.finfo(float).eps

KINDS = ("interval", "triangle", "simplex", "box", "ball")


@dataclass(frozen=True)
class Domain:
    """Closed convex support set.

    ``kind`` is one of ``interval`` ([0, 1]), ``triangle``
    ({a, b >= 0, a + b <= 1}), ``simplex`` (probability simplex in R^dim),
    ``box`` ([lo, hi]^dim) or ``ball`` (unit Euclidean ball in R^dim).
    """

    kind: str
    dim: int = 1
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BadInput(f"unknown domain kind {self.kind!r}")
        if self.kind == "interval" and self.dim != 1:
            raise BadInput("interval domain has dim 1")
        if self.kind == "triangle" and self.dim != 2:
            raise BadInput("triangle domain has dim 2")
        if self.dim < 1:
            raise BadInput("dim must be >= 1")
        if self.kind == "box" and not self.lo < self.hi:
            raise BadInput("box needs lo < hi")

    @classmethod
    def interval(cls):
        return cls("interval", 1)

    @classmethod
    def triangle(cls):
        return cls("triangle", 2)

    @classmethod
    def simplex(cls, d):
        return cls("simplex", d)

    @classmethod
    def box(cls, d, lo=0.0, hi=1.0):
        return cls("box", d, lo, hi)

    @classmethod
    def ball(cls, d):
        return cls("ball", d)

    def contains(self, point, tol=TAU_DOM):
        p = np.asarray(point, dtype=float).reshape(-1)
        if p.shape[0] != self.dim or not np.all(np.isfinite(p)):
            return False
        if self.kind in ("interval", "box"):
            lo, hi = (0.0, 1.0) if self.kind == "interval" else (self.lo, self.hi)
            return bool(np.all(p >= lo - tol) and np.all(p <= hi + tol))
        if self.kind == "triangle":
            return bool(np.all(p >= -tol) and p.sum() <= 1.0 + tol)
        if self.kind == "simplex":
            return bool(np.all(p >= -tol) and abs(p.sum() - 1.0) <= tol)
        return bool(np.linalg.norm(p) <= 1.0 + tol)

    def to_dict(self):
        out = {"kind": self.kind, "dim": self.dim}
        if self.kind == "box":
            out.update(lo=self.lo, hi=self.hi)
        return out

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                data["kind"],
                int(data.get("dim", 1)),
                float(data.get("lo", 0.0)),
                float(data.get("hi", 1.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BadInput(f"bad domain record: {data!r}") from exc


def _as_points(locations, dim=None):
    """Coerce locations to a (k, dim) array; complex scalars become (re, im)."""
    arr = np.asarray(locations)
    if np.iscomplexobj(arr):
        arr = arr.reshape(-1)
        arr = np.stack([arr.real, arr.imag], axis=1)
    arr = np.asarray(arr, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim in (None, 1) else arr.reshape(-1, dim)
    if arr.ndim != 2:
        raise BadInput("locations must be a list of points")
    return arr


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpikeMixture:
    """k-spike probability measure on a domain.

    ``locations`` is stored as a read-only (k, dim) array and ``weights`` as
    a read-only (k,) array summing to one.
    """

    domain: Domain
    locations: np.ndarray
    weights: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        locs = _as_points(self.locations, self.domain.dim)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        object.__setattr__(self, "locations", _frozen(locs))
        object.__setattr__(self, "weights", _frozen(w))
        if self.validate:
            self.check()

    def check(self):
        k = self.weights.shape[0]
        if k < 1 or self.locations.shape[0] != k:
            raise BadInput("need k >= 1 spikes with one weight per location")
        if self.locations.shape[1] != self.domain.dim:
            raise DomainMismatch(
                f"locations have dim {self.locations.shape[1]}, "
                f"domain has dim {self.domain.dim}"
            )
        if not np.all(np.isfinite(self.weights)):
            raise BadInput("non-finite weight")
        if np.any(self.weights < -TAU_W):
            raise BadInput("negative weight in a probability mixture")
        if abs(self.weights.sum() - 1.0) > SUM_TOL:
            raise BadInput(f"weights sum to {self.weights.sum()!r}, not 1")
        for p in self.locations:
            if not self.domain.contains(p):
                raise BadInput(f"location {p} outside {self.domain.kind}")

    @property
    def k(self):
        return self.weights.shape[0]

    @property
    def dim(self):
        return self.domain.dim

    @property
    def points(self):
        """Locations as a flat vector (1-D mixtures only)."""
        if self.dim != 1:
            raise DomainMismatch("points is only defined for 1-D mixtures")
        return self.locations[:, 0]

    def to_signed(self):
        return SignedSpikeMixture(self.domain, self.locations, self.weights)

    def to_dict(self):
        return {
            "domain": self.domain.to_dict(),
            "locations": self.locations.tolist(),
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            domain = Domain.from_dict(data["domain"])
            return cls(domain, data["locations"], data["weights"])
        except (KeyError, TypeError, ValueError) as exc:
            raise BadInput(f"bad mixture record: {exc}") from exc

    def __repr__(self):
        return f"SpikeMixture({self.domain.kind}, k={self.k}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class SignedSpikeMixture:
    """Spike measure whose weights may be negative or complex but sum to one."""

    domain: Domain
    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        locs = _as_points(self.locations, self.domain.dim if self.domain else None)
        w = np.asarray(self.weights).reshape(-1)
        if not np.iscomplexobj(w):
            w = w.astype(float)
        object.__setattr__(self, "locations", _frozen(locs))
        object.__setattr__(self, "weights", _frozen(w))
        if locs.shape[0] != w.shape[0] or w.shape[0] < 1:
            raise BadInput("need k >= 1 spikes with one weight per location")
        s = complex(w.sum())
        if abs(s.real - 1.0) > SUM_TOL or abs(s.imag) > SUM_TOL:
            raise BadInput(f"signed weights sum to {s!r}, not 1")

    @property
    def k(self):
        return self.weights.shape[0]

    @property
    def is_complex(self):
        return np.iscomplexobj(self.weights)

    def to_dict(self):
        if self.is_complex:
            w = [[float(z.real), float(z.imag)] for z in self.weights]
        else:
            w = self.weights.tolist()
        return {
            "domain": self.domain.to_dict(),
            "locations": self.locations.tolist(),
            "weights": w,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            domain = Domain.from_dict(data["domain"])
            raw = data["weights"]
            if raw and isinstance(raw[0], (list, tuple)):
                w = np.array([complex(re, im) for re, im in raw])
            else:
                w = np.asarray(raw, dtype=float)
            return cls(domain, data["locations"], w)
        except (KeyError, TypeError, ValueError) as exc:
            raise BadInput(f"bad mixture record: {exc}") from exc


@dataclass(frozen=True)
class TransportPlan:
    """Sparse optimal coupling: ``mass[e]`` moves from ``source[e]`` to ``sink[e]``."""

    source: np.ndarray
    sink: np.ndarray
    mass: np.ndarray
    cost: float

    def matrix(self, n_source, n_sink):
        out = np.zeros((n_source, n_sink))
        np.add.at(out, (self.source, self.sink), self.mass)
        return out


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------


def project_simplex(v):
    """Euclidean projection onto {x >= 0, sum x = 1} by sort-and-threshold."""
    v = np.asarray(v, dtype=float)
    if v.min() >= 0.0 and abs(v.sum() - 1.0) <= PROJ_EPS * v.size:
        return v.copy()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def project_to_domain(point, domain):
    """Euclidean projection of ``point`` onto ``domain``.

    A complex scalar is read as a point of the plane; for the interval its
    imaginary part is dropped, for the triangle it maps to (re, im) and the
    result is returned as a complex number again.
    """
    if np.iscomplexobj(point) and np.ndim(point) == 0:
        z = complex(point)
        if domain.kind == "interval":
            return float(min(max(z.real, 0.0), 1.0))
        p = project_to_domain(np.array([z.real, z.imag]), domain)
        return complex(p[0], p[1])
    p = np.asarray(point, dtype=float)
    scalar = p.ndim == 0
    p = p.reshape(-1)
    kind = domain.kind
    if kind == "interval":
        out = np.clip(p, 0.0, 1.0)
    elif kind == "box":
        out = np.clip(p, domain.lo, domain.hi)
    elif kind == "triangle":
        out = np.maximum(p, 0.0)
        if out.sum() > 1.0:
            out = project_simplex(p)
    elif kind == "simplex":
        out = project_simplex(p)
    else:
        nrm = np.linalg.norm(p)
        out = p / nrm if nrm > 1.0 + PROJ_EPS else p.copy()
    return float(out[0]) if scalar else out


def project_triangle_complex(z):
    """Project a complex number onto {a + b i : a, b >= 0, a + b <= 1}."""
    return project_to_domain(complex(z), Domain.triangle())


# ---------------------------------------------------------------------------
# transport
# ---------------------------------------------------------------------------


def _cost_matrix(xa, xb, metric):
    if metric == "l1":
        return cdist(xa, xb, metric="cityblock")
    if metric == "l2":
        return cdist(xa, xb, metric="euclidean")
    raise BadInput(f"unknown ground metric {metric!r}")


def _emd(xa, wa, xb, wb, metric="l1"):
    """Optimal transport between nonnegative measures of (nearly) equal mass.

    Returns (cost, plan) where plan indices refer to the input arrays.
    """
    ia = np.nonzero(wa > 0)[0]
    ib = np.nonzero(wb > 0)[0]
    if ia.size == 0 or ib.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return 0.0, TransportPlan(empty, empty, np.zeros(0), 0.0)
    if ia.size > MAX_SPIKES or ib.size > MAX_SPIKES:
        raise TooLarge(f"transport limited to {MAX_SPIKES} spikes per side")
    cost = np.ascontiguousarray(_cost_matrix(xa[ia], xb[ib], metric))
    max_iter = 8 * (ia.size + ib.size) ** 2 + 64
    flow, _, ok = _kernels.min_cost_flow_kernel(
        np.ascontiguousarray(wa[ia], dtype=float),
        np.ascontiguousarray(wb[ib], dtype=float),
        cost,
        max_iter,
    )
    if not ok:
        raise Infeasible("min-cost flow did not terminate")
    src, snk = np.nonzero(flow > 0)
    mass = flow[src, snk]
    total = float(np.dot(mass, cost[src, snk]))
    return total, TransportPlan(ia[src], ib[snk], mass, total)


def _same_space(a, b):
    if a.locations.shape[1] != b.locations.shape[1]:
        raise DomainMismatch("mixtures live in spaces of different dimension")
    if (
        a.domain is not None
        and b.domain is not None
        and (a.domain.kind, a.domain.dim) != (b.domain.kind, b.domain.dim)
    ):
        raise DomainMismatch(f"{a.domain.kind} vs {b.domain.kind}")


def transport_1d(a, b):
    """Exact W1 distance between two mixtures on the interval.

    Also valid for signed real weights, since in one dimension the
    integral of |F_a - F_b| equals the dual (1-Lipschitz) formulation.
    """
    if a.locations.shape[1] != 1 or b.locations.shape[1] != 1:
        raise DomainMismatch("transport_1d needs 1-D mixtures")
    _same_space(a, b)
    x = np.concatenate([a.locations[:, 0], b.locations[:, 0]])
    w = np.concatenate([np.real(a.weights), -np.real(b.weights)])
    order = np.argsort(x, kind="stable")
    x = x[order]
    cdf = np.cumsum(w[order])
    return float(np.sum(np.abs(cdf[:-1]) * np.diff(x)))


def transport_general(a, b, metric="l1"):
    """Optimal transport cost and plan between two probability mixtures."""
    _same_space(a, b)
    if a.k > MAX_SPIKES or b.k > MAX_SPIKES:
        raise TooLarge(f"transport limited to {MAX_SPIKES} spikes per side")
    return _emd(a.locations, a.weights, b.locations, b.weights, metric)


def _difference_parts(xa, wa, xb, wb):
    """Positive and negative parts of (a - b) on the merged support."""
    pts = np.concatenate([xa, xb])
    w = np.concatenate([wa, -wb])
    uniq, inv = np.unique(pts, axis=0, return_inverse=True)
    diff = np.zeros(uniq.shape[0])
    np.add.at(diff, inv.reshape(-1), w)
    return uniq, np.maximum(diff, 0.0), np.maximum(-diff, 0.0)


def _signed_cost(xa, wa, xb, wb, metric):
    pts, pos, neg = _difference_parts(xa, wa, xb, wb)
    cost, _ = _emd(pts, pos, pts, neg, metric)
    return cost


def transport_signed(a, b, metric="l1"):
    """Transport between signed measures: T((a - b)^+, (b - a)^+)."""
    if np.iscomplexobj(a.weights) or np.iscomplexobj(b.weights):
        raise BadInput("complex weights: use transport_complex")
    _same_space(a, b)
    return _signed_cost(a.locations, a.weights, b.locations, b.weights, metric)


def transport_complex(a, b, metric="l1"):
    """Real-part transport plus imaginary-part transport."""
    _same_space(a, b)
    wa = np.asarray(a.weights, dtype=complex)
    wb = np.asarray(b.weights, dtype=complex)
    re = _signed_cost(a.locations, wa.real, b.locations, wb.real, metric)
    im = _signed_cost(a.locations, wa.imag, b.locations, wb.imag, metric)
    return re + im


def repair_weights(locations, weights, metric="l1"):
    """Probability weights on ``locations`` closest to signed ``weights``.

    Negative mass is cancelled against positive spikes by a min-cost flow; a
    zero-cost dummy source supplies the mass that survives, so its outflow is
    the answer. Exact for the signed-transport objective over this support.
    """
    w = np.asarray(weights)
    if np.iscomplexobj(w):
        raise BadInput("repair needs real weights")
    w = w.astype(float)
    locs = _as_points(locations)
    pos = np.maximum(w, 0.0)
    neg = np.maximum(-w, 0.0)
    if pos.sum() <= 0.0:
        raise Infeasible("no positive weight to normalise")
    if np.all(w >= -TAU_W):
        return pos / pos.sum()
    xs = locs[neg > 0]
    n_src = xs.shape[0]
    xb = locs[pos > 0]
    cost = np.vstack([_cost_matrix(xs, xb, metric), np.zeros((1, xb.shape[0]))])
    supply = np.append(neg[neg > 0], max(pos.sum() - neg.sum(), 0.0))
    demand = pos[pos > 0]
    max_iter = 8 * (supply.size + demand.size) ** 2 + 64
    flow, _, ok = _kernels.min_cost_flow_kernel(
        supply, demand, np.ascontiguousarray(cost), max_iter
    )
    if not ok:
        raise Infeasible("repair flow did not terminate")
    out = np.zeros_like(w)
    out[pos > 0] = flow[n_src]
    if out.sum() <= 0.0:
        raise Infeasible("all positive mass was cancelled")
    return out / out.sum()


def repair_negative_weights(m, metric="l1"):
    """Closest :class:`SpikeMixture` on ``m``'s support in signed transport."""
    out = repair_weights(m.locations, m.weights, metric)
    locs = np.array(m.locations)
    if m.domain is not None:
        locs = np.array([project_to_domain(p, m.domain) for p in locs]).reshape(
            locs.shape
        )
    return SpikeMixture(m.domain, locs, out)


# ---------------------------------------------------------------------------
# random mixtures
# ---------------------------------------------------------------------------

GEN_TRIES = 10_000


def _uniform_points(domain, n, rng, concentration):
    d = domain.dim
    if domain.kind == "interval":
        return rng.uniform(0.0, 1.0, (n, 1))
    if domain.kind == "box":
        return rng.uniform(domain.lo, domain.hi, (n, d))
    if domain.kind == "triangle":
        return rng.dirichlet(np.ones(3), size=n)[:, :2]
    if domain.kind == "simplex":
        return rng.dirichlet(np.full(d, concentration), size=n)
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.uniform(0.0, 1.0, (n, 1)) ** (1.0 / d)


def _min_gap(x):
    if x.shape[0] < 2:
        return np.inf
    return float(cdist(x, x, metric="cityblock")[np.triu_indices(x.shape[0], 1)].min())


def random_mixture(
    domain,
    k,
    rng,
    separation=None,
    coincident=False,
    min_weight=0.0,
    concentration=1.0,
):
    """Random k-spike mixture on ``domain``.

    ``separation`` asks for pairwise L1 distance at least that value (by
    rejection); ``coincident`` puts every spike on one point. Weights are
    ``min_weight + (1 - k min_weight) * Dirichlet(1)``.
    """
    from .prony1d import make_rng

    rng = make_rng(rng)
    if k < 1:
        raise BadInput("k must be >= 1")
    if not 0.0 <= min_weight * k <= 1.0:
        raise BadInput("min_weight must lie in [0, 1/k]")
    if coincident:
        locs = np.repeat(_uniform_points(domain, 1, rng, concentration), k, axis=0)
    elif separation:
        for _ in range(GEN_TRIES):
            locs = _uniform_points(domain, k, rng, concentration)
            if _min_gap(locs) >= separation:
                break
        else:
            raise Infeasible(f"no {k} points with separation {separation} after {GEN_TRIES} draws")
    else:
        locs = _uniform_points(domain, k, rng, concentration)
    locs = np.array([project_to_domain(p, domain) for p in locs]).reshape(k, domain.dim)
    w = min_weight + (1.0 - k * min_weight) * rng.dirichlet(np.ones(k))
    return SpikeMixture(domain, locs, w / w.sum())
