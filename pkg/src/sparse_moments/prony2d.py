"""Recovery of a k-spike mixture on the unit triangle via ``beta = a + b i``.

The real mixed moments are turned into conjugate moments, after which the
1-D pipeline runs over the complex numbers: complex ridge solve, complex
companion roots, projection onto the triangle, jitter, a square complex
Vandermonde solve against ``G[0, :k]``, normalisation, and the real part of
the weights fed to the L1 repair in the plane.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BadInput, DegenerateSupport
from .mixtures import Domain, SpikeMixture, project_to_domain, repair_weights
from .moments import MomentGrid2D, build_hankel, complex_transform
from .prony1d import (
    JITTER_RETRIES,
    RecoveryConfig1D,
    RecoveryReport,
    fit_weights,
    make_rng,
    monic_roots,
    ridge_solve,
    root_backward_error,
)

TRIANGLE = Domain.triangle()


@dataclass(frozen=True)
class RecoveryConfig2D(RecoveryConfig1D):
    pass


def ridge_characteristic_complex(G, xi):
    """Complex ridge estimate of the characteristic coefficients."""
    H = build_hankel(G)
    return ridge_solve(H.A, H.b, xi)


def project_triangle_points(z):
    """Project each complex number onto the triangle, as a complex array."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    out = np.empty_like(z)
    for i, zi in enumerate(z):
        out[i] = project_to_domain(zi, TRIANGLE)
    return out


def _in_triangle(z):
    return (z.real >= 0.0) & (z.imag >= 0.0) & (z.real + z.imag <= 1.0)


def separate_in_triangle(points, xi, rng):
    """Jitter complex points by at most ``xi`` so they are distinct and stay inside."""
    rng = make_rng(rng)
    base = np.asarray(points, dtype=complex)
    k = base.size
    if xi <= 0:
        if np.unique(base).size != k:
            raise DegenerateSupport("duplicate projected roots and xi = 0")
        return base
    for _ in range(JITTER_RETRIES):
        r = xi * np.sqrt(rng.uniform(0.0, 1.0, size=k))
        phi = rng.uniform(0.0, 2.0 * np.pi, size=k)
        u = r * np.exp(1j * phi)
        cand = base + u
        bad = ~_in_triangle(cand)
        cand[bad] = base[bad] - u[bad]
        if _in_triangle(cand).all() and np.unique(cand).size == k:
            return cand
    # graded offsets along the direction towards the centroid
    centre = (1.0 + 1.0j) / 3.0
    off = np.arange(k) * xi / k**2
    d = centre - base
    nd = np.abs(d)
    d = np.where(nd > 0, d / np.where(nd > 0, nd, 1.0), 1.0 + 0.0j)
    cand = base + off * d
    if np.unique(cand).size != k:
        raise DegenerateSupport("could not separate projected roots")
    return cand


def recover_2d(M, cfg):
    """Recover a k-spike mixture on the triangle from mixed moments of degree < 2k."""
    if not isinstance(M, MomentGrid2D):
        raise BadInput("recover_2d needs a MomentGrid2D")
    k = cfg.k
    M.require(2 * k - 1)
    rng = make_rng(cfg.rng_seed)

    G = complex_transform(M, k)
    H = build_hankel(G)
    c_hat = ridge_solve(H.A, H.b, cfg.xi)
    residual_ridge = float(np.max(np.abs(H.A @ c_hat + H.b)))
    roots = monic_roots(c_hat)
    nodes = separate_in_triangle(project_triangle_points(roots), cfg.jitter, rng)
    w_hat, w_tilde, residual_w = fit_weights(nodes, G.values[0, :k])
    w_real = np.real(w_tilde)
    locs = np.stack([nodes.real, nodes.imag], axis=1)
    w_check = repair_weights(locs, w_real, metric="l1")
    flags = []
    if np.any(w_real < -1e-12):
        flags.append("negative_weights_repaired")
    mixture = SpikeMixture(TRIANGLE, locs, w_check)
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
