"""K-snapshot topic model: corpus sampling and projected-moment estimation.

A document draws one topic ``i ~ w`` and then K iid words from ``alpha_i``.
To estimate moments of ``R^T alpha`` each word x_j is replaced by a
Bernoulli coin with mean ``R[x_j]``; products of coins over distinct words
are then unbiased for products of projected topic coordinates.
"""

import json
import zlib
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import BadInput, InsufficientSnapshot
from ..highdim import QueryLog, check_query
from ..mixtures import Domain
from ..moments import MomentGrid2D, MomentVector1D, binom
from ..prony1d import make_rng


@dataclass(frozen=True, eq=False)
class TopicCorpus:
    """``docs`` is an (n, K) integer array of 1-based word ids."""

    d: int
    K: int
    docs: np.ndarray
    generator: object = None

    def __post_init__(self):
        docs = np.asarray(self.docs, dtype=np.int64)
        if docs.ndim != 2 or docs.shape[1] != self.K:
            raise BadInput(f"docs must be an (n, {self.K}) array")
        if docs.size and (docs.min() < 1 or docs.max() > self.d):
            raise BadInput(f"word ids must lie in [1, {self.d}]")
        docs.setflags(write=False)
        object.__setattr__(self, "docs", docs)

    @property
    def n(self):
        return self.docs.shape[0]

    def dump(self, path):
        """One JSON array per line, UTF-8, LF line endings."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for doc in self.docs:
                fh.write(json.dumps([int(x) for x in doc]) + "\n")

    @classmethod
    def load(cls, path, d=None):
        docs = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    doc = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise BadInput(f"{path}:{lineno}: {exc}") from None
                if not isinstance(doc, list) or not all(isinstance(x, int) for x in doc):
                    raise BadInput(f"{path}:{lineno}: expected an array of integers")
                docs.append(doc)
        if not docs:
            raise BadInput(f"{path}: empty corpus")
        lengths = {len(doc) for doc in docs}
        if len(lengths) != 1:
            raise BadInput(f"{path}: documents have different lengths {sorted(lengths)}")
        arr = np.array(docs, dtype=np.int64)
        return cls(int(arr.max()) if d is None else d, arr.shape[1], arr)


def sample_corpus(mixture, K, n_docs, rng):
    """Draw ``n_docs`` K-snapshots from a topic mixture on the simplex."""
    if K < 1:
        raise BadInput("K must be >= 1")
    if mixture.domain.kind != "simplex":
        raise BadInput("topics must live on the simplex")
    rng = make_rng(rng)
    d = mixture.dim
    topics = rng.choice(mixture.k, size=n_docs, p=mixture.weights)
    docs = np.empty((n_docs, K), dtype=np.int64)
    for i in range(mixture.k):
        idx = np.nonzero(topics == i)[0]
        p = np.clip(mixture.locations[i], 0.0, None)
        docs[idx] = rng.choice(d, size=(idx.size, K), p=p / p.sum()) + 1
    return TopicCorpus(d, K, docs, mixture)


def _coins(corpus, r, rng, conditional):
    means = np.asarray(r, dtype=float)[corpus.docs - 1]
    if conditional:
        return means
    return (rng.random(means.shape) < means).astype(float)


def _grid_pairs(degree):
    return np.array(
        [(t1, t2) for t1 in range(degree + 1) for t2 in range(degree + 1 - t1)],
        dtype=np.int64,
    )


def topic_projected_moments(corpus, R, degree, rng=0, n_perm=8, conditional=False):
    """Unbiased moments of ``R^T alpha`` up to ``degree`` and their standard errors.

    With ``conditional=True`` the coins are replaced by their means, which
    is the Rao-Blackwellised (lower variance) version of the same estimator.
    Returns ``(moments, se)`` with ``se`` shaped like ``moments.values``.
    """
    R = np.asarray(R, dtype=float)
    if R.ndim == 1:
        R = R[:, None]
    if R.shape[0] != corpus.d or R.shape[1] not in (1, 2):
        raise BadInput(f"R must be {corpus.d} x 1 or {corpus.d} x 2")
    if R.min() < 0 or R.max() > 1:
        raise BadInput("topic queries need entries in [0, 1]")
    if degree > corpus.K:
        raise InsufficientSnapshot(f"degree {degree} needs K >= {degree}, corpus has K={corpus.K}")
    rng = make_rng(rng)
    n, K = corpus.n, corpus.K
    k = (degree + 1) // 2

    if R.shape[1] == 1:
        b = _coins(corpus, R[:, 0], rng, conditional)
        denom = np.array([binom(K, t) for t in range(degree + 1)], dtype=float)
        per_doc = _kernels.esym_kernel(b, degree, denom)
        vals = per_doc.mean(axis=0)
        se = per_doc.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(vals)
        vals[0], se[0] = 1.0, 0.0
        return MomentVector1D(k, vals), se

    b1 = _coins(corpus, R[:, 0], rng, conditional)
    b2 = _coins(corpus, R[:, 1], rng, conditional)
    perms = np.array([rng.permutation(K) for _ in range(n_perm)], dtype=np.int64)
    pairs = _grid_pairs(degree)
    per_doc = _kernels.block_products_kernel(b1, b2, perms, pairs)
    vals = np.full((degree + 1, degree + 1), np.nan)
    se = np.full_like(vals, np.nan)
    mean = per_doc.mean(axis=0)
    sd = per_doc.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(mean)
    vals[pairs[:, 0], pairs[:, 1]] = mean
    se[pairs[:, 0], pairs[:, 1]] = sd
    vals[0, 0], se[0, 0] = 1.0, 0.0
    return MomentGrid2D(k, vals), se


class TopicOracle:
    """Projected-moment oracle backed by a corpus.

    Each query gets its own coin stream keyed on ``(rng_seed, R)``, so the
    answers do not depend on the order in which threads ask.
    """

    def __init__(self, corpus, rng_seed=0, n_perm=8, conditional=False):
        self.corpus = corpus
        self.rng_seed = int(rng_seed)
        self.n_perm = n_perm
        self.conditional = conditional
        self.queries = QueryLog()
        self.standard_errors = []

    @property
    def domain(self):
        return Domain.simplex(self.corpus.d)

    def query(self, R, K):
        R = check_query(R, self.corpus.d)
        self.queries.append(R)
        key = zlib.crc32(np.ascontiguousarray(R).tobytes())
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([self.rng_seed, key])))
        M, se = topic_projected_moments(
            self.corpus, R, K, rng, n_perm=self.n_perm, conditional=self.conditional
        )
        self.standard_errors.append(float(np.nanmax(se)))
        return M
