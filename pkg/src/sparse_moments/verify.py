"""Brute-force reference computations.

Nothing here calls LAPACK or the recovery pipeline: determinants are exact
cofactor expansions over rationals, Schur polynomials come from tableau
enumeration and the transport LP is solved by a small dense simplex. The
test suite uses these as independent oracles.
"""

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, prod

import numpy as np

from . import _kernels
from .errors import BadInput, Infeasible, TooLarge
from .mixtures import Domain, SpikeMixture, _cost_matrix, _as_points
from .moments import MomentVector1D, moment_distance, moments_1d
from .prony1d import make_rng

# ---------------------------------------------------------------------------
# determinants and symmetric polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    parts: tuple

    def __post_init__(self):
        p = tuple(int(x) for x in self.parts)
        if any(x < 0 for x in p) or any(a < b for a, b in zip(p, p[1:])):
            raise BadInput(f"partition must be weakly decreasing and nonnegative: {p}")
        object.__setattr__(self, "parts", p)

    @property
    def size(self):
        return sum(self.parts)

    def padded(self, k):
        if len(self.parts) > k and any(self.parts[k:]):
            raise BadInput(f"partition {self.parts} has more than {k} nonzero parts")
        return (self.parts + (0,) * k)[:k]


def det_exact(rows):
    """Determinant by cofactor expansion along the first row, in exact rationals.

    A minor is fixed by its remaining column set (its rows are always the
    last ones), so minors are cached and the expansion costs n 2^n, not n!.
    """
    A = [[Fraction(x) for x in row] for row in rows]
    n = len(A)
    if any(len(r) != n for r in A):
        raise BadInput("matrix must be square")
    memo = {}

    def rec(cols):
        if not cols:
            return Fraction(1)
        if cols in memo:
            return memo[cols]
        r = n - len(cols)
        total = Fraction(0)
        for pos, c in enumerate(cols):
            if A[r][c] == 0:
                continue
            total += (-1) ** pos * A[r][c] * rec(cols[:pos] + cols[pos + 1 :])
        memo[cols] = total
        return total

    return rec(tuple(range(n)))


def _ssyt(shape, k):
    """Yield the content vector of every SSYT of ``shape`` with entries 1..k."""
    cells = [(r, c) for r, length in enumerate(shape) for c in range(length)]
    grid = {}
    counts = [0] * k

    def fill(idx):
        if idx == len(cells):
            yield tuple(counts)
            return
        r, c = cells[idx]
        lo = 1
        if c > 0:
            lo = max(lo, grid[(r, c - 1)])
        if r > 0:
            lo = max(lo, grid[(r - 1, c)] + 1)
        for v in range(lo, k + 1):
            grid[(r, c)] = v
            counts[v - 1] += 1
            yield from fill(idx + 1)
            counts[v - 1] -= 1
        grid.pop((r, c), None)

    yield from fill(0)


@lru_cache(maxsize=256)
def _monomial_items(shape, k):
    return tuple(Counter(_ssyt(list(shape), k)).items())


def schur_monomials(lam, k):
    """Schur polynomial in k variables as a Counter {exponent tuple: coefficient}."""
    lam = lam if isinstance(lam, Partition) else Partition(tuple(lam))
    shape = tuple(p for p in lam.padded(k) if p > 0)
    return Counter(dict(_monomial_items(shape, k)))


def schur_bruteforce(lam, x):
    """Evaluate the Schur polynomial of shape ``lam`` at x by tableau enumeration."""
    x = list(x)
    k = len(x)
    lam = lam if isinstance(lam, Partition) else Partition(tuple(lam))
    if k > 5 or lam.size > 10:
        raise TooLarge("tableau enumeration limited to k <= 5, |lambda| <= 10")
    shape = tuple(p for p in lam.padded(k) if p > 0)
    return float(sum(c * prod(xi**e for xi, e in zip(x, exps)) for exps, c in _monomial_items(shape, k)))


def alternant_ratio(lam, x):
    """``det[x_j^(lam_i + k - i)] / det[x_j^(k - i)]`` with rows in descending powers."""
    x = [Fraction(v) for v in x]
    k = len(x)
    lam = (lam if isinstance(lam, Partition) else Partition(tuple(lam))).padded(k)
    num = [[xj ** (lam[i] + k - 1 - i) for xj in x] for i in range(k)]
    den = [[xj ** (k - 1 - i) for xj in x] for i in range(k)]
    return float(det_exact(num) / det_exact(den))


def vandermonde_ratio(a, j):
    """Determinant ratio with numerator rows ``a^j, a^1, ..., a^(k-1)``
    and denominator rows ``1, a^1, ..., a^(k-1)`` (columns are the nodes)."""
    a = [Fraction(v) for v in a]
    k = len(a)
    if not 1 <= k <= 6:
        raise TooLarge("cofactor oracle limited to 1 <= k <= 6")
    if j < k:
        raise BadInput("need j >= k")
    if min((abs(p - q) for p, q in itertools.combinations(a, 2)), default=1) < 1e-6:
        raise BadInput("nodes must be distinct by at least 1e-6")
    # numerator and denominator differ only in the first row, so both are
    # expansions along it against the same signed cofactors
    cof = _first_row_cofactors(tuple(a))
    return float(sum(ai**j * c for ai, c in zip(a, cof)) / sum(cof))


@lru_cache(maxsize=1024)
def _first_row_cofactors(a):
    k = len(a)
    rows = [[ai**t for ai in a] for t in range(1, k)]
    return tuple(
        (-1) ** c * det_exact([row[:c] + row[c + 1 :] for row in rows]) for c in range(k)
    )


def composition_sum(a, j):
    """``prod(a) * sum over s >= 0 with |s| = j - k of prod a^s``."""
    a = [Fraction(v) for v in a]
    k = len(a)
    m = j - k
    if m < 0:
        raise BadInput("need j >= k")
    if comb(m + k - 1, k - 1) > 10**6:
        raise TooLarge("more than 1e6 compositions")
    # multisets of size m over k symbols are in bijection with the compositions
    total = sum(
        (prod(a[i] for i in combo) for combo in itertools.combinations_with_replacement(range(k), m)),
        Fraction(0),
    )
    return float(prod(a) * total)


# ---------------------------------------------------------------------------
# transport LP
# ---------------------------------------------------------------------------

EPS = 1e-12


def _pivot(T, r, c):
    T[r] /= T[r, c]
    for i in range(T.shape[0]):
        if i != r and T[i, c] != 0.0:
            T[i] -= T[i, c] * T[r]


def _simplex(T, basis, allowed):
    """Minimise the objective in the last row of tableau T with Bland's rule."""
    while True:
        obj = T[-1, :-1]
        enter = next((j for j in range(obj.size) if allowed[j] and obj[j] < -EPS), None)
        if enter is None:
            return
        col = T[:-1, enter]
        ratios = [
            (T[i, -1] / col[i], basis[i], i) for i in range(col.size) if col[i] > EPS
        ]
        if not ratios:
            raise Infeasible("transport LP is unbounded")
        best = min(r[0] for r in ratios)
        # Bland: among ties, the smallest basic variable leaves
        _, _, leave = min(r for r in ratios if r[0] <= best + EPS)
        _pivot(T, leave, enter)
        basis[leave] = enter


def transport_lp_reference(a, b, metric="l1"):
    """Transport distance from a two-phase dense simplex on the coupling LP."""
    xa = _as_points(a.locations)
    xb = _as_points(b.locations)
    wa = np.asarray(a.weights, dtype=float)
    wb = np.asarray(b.weights, dtype=float)
    n, m = wa.size, wb.size
    if n * m > 400:
        raise TooLarge("reference LP limited to 400 coupling variables")
    cost = _cost_matrix(xa, xb, metric).ravel()
    nv = n * m
    rows = n + m
    # constraints: row sums = wa, column sums = wb, one artificial per row
    T = np.zeros((rows + 1, nv + rows + 1))
    for i in range(n):
        T[i, i * m : (i + 1) * m] = 1.0
        T[i, -1] = wa[i]
    for j in range(m):
        T[n + j, j:nv:m] = 1.0
        T[n + j, -1] = wb[j]
    T[:rows, nv : nv + rows] = np.eye(rows)
    basis = list(range(nv, nv + rows))

    # phase I: minimise the sum of artificials
    T[-1, :] = 0.0
    T[-1, :nv] = -T[:rows, :nv].sum(axis=0)
    T[-1, -1] = -T[:rows, -1].sum()
    _simplex(T, basis, [True] * (nv + rows))
    if T[-1, -1] < -1e-9:
        raise Infeasible("marginals do not balance")

    # drive zero-level artificials out of the basis, drop redundant rows
    keep = []
    for i in range(rows):
        if basis[i] >= nv:
            j = next((j for j in range(nv) if abs(T[i, j]) > EPS), None)
            if j is None:
                continue
            _pivot(T, i, j)
            basis[i] = j
        keep.append(i)
    T = np.vstack([T[keep], T[-1:]])
    basis = [basis[i] for i in keep]

    # phase II
    T[-1, :] = 0.0
    T[-1, :nv] = cost
    for i, bv in enumerate(basis):
        T[-1] -= T[-1, bv] * T[i]
    _simplex(T, basis, [True] * nv + [False] * rows)
    return float(-T[-1, -1])


# ---------------------------------------------------------------------------
# recovery and inequality oracles
# ---------------------------------------------------------------------------


def grid_recover_oracle(M, k, grid_step):
    """Exhaustive grid search for the k-spike mixture (k <= 2) closest in moments."""
    if k not in (1, 2):
        raise BadInput("grid oracle supports k in {1, 2}")
    if not 0 < grid_step <= 1:
        raise BadInput("grid_step must lie in (0, 1]")
    if not isinstance(M, MomentVector1D):
        M = MomentVector1D(k, M)
    g = int(round(1.0 / grid_step))
    xs = np.linspace(0.0, 1.0, g + 1)
    t = np.arange(1, M.K + 1)
    powers = xs[:, None] ** t[None, :]
    target = np.ascontiguousarray(M.values[1:])
    dom = Domain.interval()
    if k == 1:
        i = int(np.argmin(np.abs(powers - target).max(axis=1)))
        return SpikeMixture(dom, xs[[i]], np.array([1.0]))
    i1, i2, iw, _ = _kernels.grid2_kernel(powers, target, g)
    w = iw / g
    return SpikeMixture(dom, xs[[i1, i2]], np.array([w, 1.0 - w]))


def moment_inequality_probe(k, n_pairs, rng):
    """Largest ``T / (k Mdis^(1/(2k-1)))`` over random pairs of k-spike mixtures."""
    if not 1 <= k <= 3:
        raise BadInput("probe supports k <= 3")
    from .mixtures import transport_1d

    rng = make_rng(rng)
    K = 2 * k - 1
    dom = Domain.interval()
    worst = 0.0
    for _ in range(n_pairs):
        a = SpikeMixture(dom, rng.uniform(0, 1, k), rng.dirichlet(np.ones(k)))
        b = SpikeMixture(dom, rng.uniform(0, 1, k), rng.dirichlet(np.ones(k)))
        mdis = moment_distance(moments_1d(a, K), moments_1d(b, K), K)
        if mdis < 1e-14:
            continue
        worst = max(worst, transport_1d(a, b) / (k * mdis ** (1.0 / K)))
    return worst


def tap_line(number, ok, description):
    """One TAP result line."""
    return f"{'ok' if ok else 'not ok'} {number} - {description}"
