"""Robust Prony recovery of a k-spike mixture on [0, 1].

Pipeline: ridge-regularised Hankel solve for the characteristic polynomial,
companion-matrix roots, projection to [0, 1] plus a jitter of size at most
xi, Vandermonde least squares for the weights, normalisation, and finally
the signed-transport repair of negative weights.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadInput,
    DegenerateSupport,
    NormalizationFailure,
    SingularSystem,
)
from .mixtures import Domain, SpikeMixture, repair_weights
from .moments import MomentVector1D, build_hankel, build_vandermonde

XI_FLOOR = 1e-14
JITTER_RETRIES = 32


def make_rng(seed):
    """Counter-based generator so independent streams stay reproducible."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class RecoveryConfig1D:
    k: int
    xi: float = 0.0
    jitter_scale: float = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise BadInput("k must be >= 1")
        if self.xi < 0:
            raise BadInput("xi must be >= 0")
        if self.jitter_scale is not None and not 0 < self.jitter_scale <= self.effective_xi:
            raise BadInput("jitter_scale must lie in (0, xi]")
        if self.xi > 2.0 ** (-self.k):
            warnings.warn(
                f"xi={self.xi:g} exceeds 2^-k; recovery guarantees are void",
                stacklevel=3,
            )

    @property
    def effective_xi(self):
        return self.xi if self.xi > 0 else XI_FLOOR

    @property
    def jitter(self):
        return self.jitter_scale if self.jitter_scale is not None else self.effective_xi


@dataclass
class RecoveryReport:
    """Recovered mixture plus the intermediate quantities of the pipeline."""

    mixture: SpikeMixture
    char_coeffs: np.ndarray
    raw_roots: np.ndarray
    residual_ridge: float
    residual_weights: float
    weight_sum_pre_normalization: complex
    signed_weights: np.ndarray = None
    root_backward_error: float = 0.0
    flags: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        def cplx(z):
            z = complex(z)
            return [z.real, z.imag]

        out = {
            "mixture": self.mixture.to_dict(),
            "char_coeffs": [cplx(c) for c in np.atleast_1d(self.char_coeffs)],
            "raw_roots": [cplx(r) for r in np.atleast_1d(self.raw_roots)],
            "residual_ridge": float(self.residual_ridge),
            "residual_weights": float(self.residual_weights),
            "weight_sum_pre_normalization": cplx(self.weight_sum_pre_normalization),
            "root_backward_error": float(self.root_backward_error),
            "flags": list(self.flags),
        }
        if self.signed_weights is not None:
            out["signed_weights"] = [cplx(w) for w in self.signed_weights]
        out.update(self.extra)
        return out


def ridge_solve(A, b, xi):
    """Minimiser of ``|A x + b|^2 + xi^2 |x|^2`` (real or complex).

    Uses the SVD filter-factor form ``x = -V diag(s / (s^2 + xi^2)) U^H b``,
    which equals ``-(A^H A + xi^2 I)^{-1} A^H b`` without squaring the
    condition number.
    """
    A = np.asarray(A)
    b = np.asarray(b)
    U, s, Vh = np.linalg.svd(A)
    if xi == 0:
        if s[-1] <= s[0] * np.finfo(float).eps * A.shape[0] or s[0] == 0:
            raise SingularSystem("Hankel matrix is singular and xi = 0")
        filt = 1.0 / s
    else:
        filt = s / (s * s + xi * xi)
    return -(Vh.conj().T @ (filt * (U.conj().T @ b)))


def ridge_characteristic(M, xi):
    """Ridge estimate of the characteristic coefficients from 1-D moments."""
    M.require(2 * M.k - 1)
    H = build_hankel(M)
    return ridge_solve(H.A, H.b, xi)


def monic_roots(c):
    """All roots of ``x^k + sum_i c_i x^i`` from the companion eigenvalues."""
    c = np.asarray(c).reshape(-1)
    if not np.all(np.isfinite(c)):
        raise BadInput("non-finite polynomial coefficient")
    k = c.size
    comp = np.zeros((k, k), dtype=np.result_type(c, float))
    comp[1:, :-1] = np.eye(k - 1)
    comp[:, -1] = -c
    return np.linalg.eigvals(comp).astype(complex)


def root_backward_error(c, roots):
    """``max_j |p(r_j)| / (1 + max |c|)`` for the monic polynomial p."""
    c = np.asarray(c).reshape(-1)
    coeffs = np.concatenate([[1.0], c[::-1]])
    vals = np.abs(np.polyval(coeffs, roots))
    return float(vals.max() / (1.0 + np.abs(c).max())) if vals.size else 0.0


def _distinct(points):
    pts = np.asarray(points)
    if pts.ndim == 1:
        return np.unique(pts).size == pts.size
    return np.unique(pts, axis=0).shape[0] == pts.shape[0]


def project_and_separate(roots, xi, rng):
    """Clamp roots to [0, 1] and jitter them apart by at most ``xi``.

    A jitter that would leave [0, 1] is reflected, which keeps its size.
    After a bounded number of redraws the fallback uses the graded offsets
    ``j * xi / k^2`` pointing into the interval.
    """
    rng = make_rng(rng)
    proj = np.clip(np.real(np.asarray(roots, dtype=complex)), 0.0, 1.0)
    k = proj.size
    if xi <= 0:
        if not _distinct(proj):
            raise DegenerateSupport("duplicate projected roots and xi = 0")
        return proj
    for _ in range(JITTER_RETRIES):
        u = rng.uniform(-xi, xi, size=k)
        cand = proj + u
        out = (cand < 0.0) | (cand > 1.0)
        cand[out] = proj[out] - u[out]
        if _distinct(cand):
            return cand
    off = np.arange(k) * xi / k**2
    cand = np.where(proj + off <= 1.0, proj + off, proj - off)
    if not _distinct(cand):
        raise DegenerateSupport("could not separate projected roots")
    return cand


def fit_weights(nodes, M):
    """Least-squares weights on ``nodes`` and their normalised version.

    Returns ``(w_hat, w_tilde, residual)``; ``residual`` is the 2-norm of
    ``V w_hat - M``.
    """
    values = getattr(M, "values", M)
    values = np.asarray(values)
    V = build_vandermonde(nodes, values.size).V
    w_hat = np.linalg.lstsq(V, values, rcond=None)[0]
    total = w_hat.sum()
    if abs(total) < 1e-12:
        raise NormalizationFailure("least-squares weights sum to ~0")
    residual = float(np.linalg.norm(V @ w_hat - values))
    return w_hat, w_hat / total, residual


def recover_1d(M, cfg):
    """Recover a k-spike mixture on [0, 1] from noisy moments M_0..M_{2k-1}."""
    if not isinstance(M, MomentVector1D):
        M = MomentVector1D(cfg.k, M)
    k = cfg.k
    M.require(2 * k - 1)
    vals = M.values[: 2 * k]
    M = MomentVector1D(k, vals, M.noise_bound)
    rng = make_rng(cfg.rng_seed)

    H = build_hankel(M)
    c_hat = ridge_solve(H.A, H.b, cfg.xi)
    residual_ridge = float(np.max(np.abs(H.A @ c_hat + H.b)))
    roots = monic_roots(c_hat)
    nodes = project_and_separate(roots, cfg.jitter, rng)
    w_hat, w_tilde, residual_w = fit_weights(nodes, M)
    w_check = repair_weights(nodes, w_tilde)
    flags = []
    if np.any(w_tilde < -1e-12):
        flags.append("negative_weights_repaired")
    if np.any(np.abs(np.imag(roots)) > 1e-12):
        flags.append("complex_roots")
    mixture = SpikeMixture(Domain.interval(), nodes, w_check)
    return RecoveryReport(
        mixture=mixture,
        char_coeffs=c_hat,
        raw_roots=roots,
        residual_ridge=residual_ridge,
        residual_weights=residual_w,
        weight_sum_pre_normalization=complex(w_hat.sum()),
        signed_weights=w_tilde,
        root_backward_error=root_backward_error(c_hat, roots),
        flags=flags,
    )
