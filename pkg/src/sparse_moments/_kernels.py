"""Hot inner loops, each in a numba and a pure-numpy flavour.

The two flavours perform the same floating-point operations in the same
order, so they agree to rounding (usually bitwise). Public callers go
through the dispatch names at the bottom; ``benchmarks/bench_kernels.py``
times the pairs against each other.
"""

import numpy as np

from ._jit import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# min-cost flow: successive shortest paths on a dense bipartite graph
# ---------------------------------------------------------------------------


@njit
def _mcf_numba(supply, demand, cost, max_iter):
    n, m = cost.shape
    nv = n + m
    flow = np.zeros((n, m))
    rs = supply.copy()
    rd = demand.copy()
    pot = np.zeros(nv)
    for j in range(m):
        pot[n + j] = cost[0, j]
        for i in range(1, n):
            if cost[i, j] < pot[n + j]:
                pot[n + j] = cost[i, j]
    dist = np.empty(nv)
    prev = np.empty(nv, dtype=np.int64)
    done = np.empty(nv, dtype=np.bool_)
    it = 0
    while it < max_iter:
        has_s = False
        for i in range(n):
            if rs[i] > 0.0:
                has_s = True
                break
        has_d = False
        for j in range(m):
            if rd[j] > 0.0:
                has_d = True
                break
        if not (has_s and has_d):
            return flow, it, True
        it += 1

        for v in range(nv):
            dist[v] = np.inf
            prev[v] = -1
            done[v] = False
        for i in range(n):
            if rs[i] > 0.0:
                dist[i] = 0.0
        for _ in range(nv):
            u = -1
            best = np.inf
            for v in range(nv):
                if not done[v] and dist[v] < best:
                    best = dist[v]
                    u = v
            if u == -1:
                break
            done[u] = True
            if u < n:
                for j in range(m):
                    v = n + j
                    if done[v]:
                        continue
                    nd = dist[u] + cost[u, j] + pot[u] - pot[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        prev[v] = u
            else:
                j = u - n
                for i in range(n):
                    if done[i] or flow[i, j] <= 0.0:
                        continue
                    nd = dist[u] - cost[i, j] + pot[u] - pot[i]
                    if nd < dist[i]:
                        dist[i] = nd
                        prev[i] = u

        t = -1
        best = np.inf
        for j in range(m):
            if rd[j] > 0.0 and dist[n + j] < best:
                best = dist[n + j]
                t = j
        if t == -1:
            return flow, it, False

        # bottleneck along sink <- source <- sink <- ... <- start source
        delta = rd[t]
        v = n + t
        while True:
            u = prev[v]
            w = prev[u]
            if w == -1:
                if rs[u] < delta:
                    delta = rs[u]
                break
            if flow[u, w - n] < delta:
                delta = flow[u, w - n]
            v = w
        v = n + t
        while True:
            u = prev[v]
            flow[u, v - n] += delta
            w = prev[u]
            if w == -1:
                rs[u] -= delta
                break
            flow[u, w - n] -= delta
            v = w
        rd[t] -= delta
        for v in range(nv):
            if dist[v] < np.inf:
                pot[v] += dist[v]
    return flow, it, False


def _mcf_numpy(supply, demand, cost, max_iter):
    n, m = cost.shape
    nv = n + m
    flow = np.zeros((n, m))
    rs = supply.copy()
    rd = demand.copy()
    pot = np.zeros(nv)
    pot[n:] = cost.min(axis=0)
    it = 0
    while it < max_iter:
        if not ((rs > 0.0).any() and (rd > 0.0).any()):
            return flow, it, True
        it += 1
        dist = np.full(nv, np.inf)
        prev = np.full(nv, -1, dtype=np.int64)
        done = np.zeros(nv, dtype=bool)
        dist[:n][rs > 0.0] = 0.0
        for _ in range(nv):
            cand = np.where(done, np.inf, dist)
            u = int(np.argmin(cand))
            if cand[u] == np.inf:
                break
            done[u] = True
            if u < n:
                nd = dist[u] + cost[u] + pot[u] - pot[n:]
                upd = ~done[n:] & (nd < dist[n:])
                dist[n:][upd] = nd[upd]
                prev[n:][upd] = u
            else:
                j = u - n
                nd = dist[u] - cost[:, j] + pot[u] - pot[:n]
                upd = ~done[:n] & (flow[:, j] > 0.0) & (nd < dist[:n])
                dist[:n][upd] = nd[upd]
                prev[:n][upd] = u

        sink_d = np.where(rd > 0.0, dist[n:], np.inf)
        t = int(np.argmin(sink_d))
        if sink_d[t] == np.inf:
            return flow, it, False

        path = []  # (source, sink, +1 forward / -1 backward)
        delta = rd[t]
        v = n + t
        while True:
            u = prev[v]
            path.append((u, v - n, 1))
            w = prev[u]
            if w == -1:
                delta = min(delta, rs[u])
                start = u
                break
            path.append((u, w - n, -1))
            delta = min(delta, flow[u, w - n])
            v = w
        for u, j, sign in path:
            if sign > 0:
                flow[u, j] += delta
            else:
                flow[u, j] -= delta
        rs[start] -= delta
        rd[t] -= delta
        finite = dist < np.inf
        pot[finite] += dist[finite]
    return flow, it, False


# ---------------------------------------------------------------------------
# topic-model estimators
# ---------------------------------------------------------------------------


@njit
def _esym_numba(values, tmax, denom):
    n, K = values.shape
    out = np.zeros((n, tmax + 1))
    e = np.empty(tmax + 1)
    for d in range(n):
        for t in range(tmax + 1):
            e[t] = 0.0
        e[0] = 1.0
        for j in range(K):
            b = values[d, j]
            top = j + 1 if j + 1 < tmax else tmax
            for t in range(top, 0, -1):
                e[t] += b * e[t - 1]
        for t in range(tmax + 1):
            out[d, t] = e[t] / denom[t]
    return out


def _esym_numpy(values, tmax, denom):
    n, K = values.shape
    e = np.zeros((n, tmax + 1))
    e[:, 0] = 1.0
    for j in range(K):
        b = values[:, j]
        for t in range(min(j + 1, tmax), 0, -1):
            e[:, t] += b * e[:, t - 1]
    return e / denom


@njit
def _block_products_numba(b1, b2, perms, pairs):
    n = b1.shape[0]
    npairs = pairs.shape[0]
    nperm = perms.shape[0]
    out = np.zeros((n, npairs))
    for d in range(n):
        for e in range(npairs):
            t1 = pairs[e, 0]
            t2 = pairs[e, 1]
            acc = 0.0
            for p in range(nperm):
                prod = 1.0
                for j in range(t1):
                    prod *= b1[d, perms[p, j]]
                for j in range(t1, t1 + t2):
                    prod *= b2[d, perms[p, j]]
                acc += prod
            out[d, e] = acc / nperm
    return out


def _block_products_numpy(b1, b2, perms, pairs):
    n = b1.shape[0]
    out = np.zeros((n, pairs.shape[0]))
    for p in range(perms.shape[0]):
        c1 = b1[:, perms[p]]
        c2 = b2[:, perms[p]]
        for e, (t1, t2) in enumerate(pairs):
            prod = np.ones(n)
            for j in range(t1):
                prod *= c1[:, j]
            for j in range(t1, t1 + t2):
                prod *= c2[:, j]
            out[:, e] += prod
    return out / perms.shape[0]


# ---------------------------------------------------------------------------
# exhaustive two-spike grid search (verification oracle)
# ---------------------------------------------------------------------------


@njit
def _grid2_numba(powers, target, steps):
    g, tt = powers.shape
    best = np.inf
    bi1 = 0
    bi2 = 0
    biw = 0
    for i1 in range(g):
        for i2 in range(i1, g):
            for iw in range(steps + 1):
                w = iw / steps
                d = 0.0
                for t in range(tt):
                    v = abs(w * powers[i1, t] + (1.0 - w) * powers[i2, t] - target[t])
                    if v > d:
                        d = v
                        if d >= best:
                            break
                if d < best:
                    best = d
                    bi1 = i1
                    bi2 = i2
                    biw = iw
    return bi1, bi2, biw, best


def _grid2_numpy(powers, target, steps):
    g = powers.shape[0]
    w = np.arange(steps + 1) / steps
    best = np.inf
    arg = (0, 0, 0)
    for i1 in range(g):
        vals = (
            w[None, :, None] * powers[i1][None, None, :]
            + (1.0 - w)[None, :, None] * powers[i1:, None, :]
            - target
        )
        dmax = np.abs(vals).max(axis=2)
        flat = int(np.argmin(dmax))
        i2, iw = divmod(flat, steps + 1)
        if dmax[i2, iw] < best:
            best = float(dmax[i2, iw])
            arg = (i1, i1 + i2, iw)
    return arg[0], arg[1], arg[2], best


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

if USE_NUMBA:
    min_cost_flow_kernel = _mcf_numba
    esym_kernel = _esym_numba
    block_products_kernel = _block_products_numba
    grid2_kernel = _grid2_numba
else:
    min_cost_flow_kernel = _mcf_numpy
    esym_kernel = _esym_numpy
    block_products_kernel = _block_products_numpy
    grid2_kernel = _grid2_numpy

KERNEL_PAIRS = {
    "min_cost_flow": (_mcf_numba, _mcf_numpy),
    "esym": (_esym_numba, _esym_numpy),
    "block_products": (_block_products_numba, _block_products_numpy),
    "grid2": (_grid2_numba, _grid2_numpy),
}
