"""Nystrom discretisation of the half-space periodic layer potentials.

For a particle boundary with nodes ``y_j`` and trapezoidal weights ``w_j``:

* ``S`` discretises ``phi -> int G+(x, y) phi(y) dsigma(y)``.  On each
  component the logarithmic singularity is integrated with Kress product
  quadrature; everything else (periodic remainder, image term, other
  components) is smooth and uses the trapezoidal rule.
* ``K`` discretises the Neumann-Poincare type operator with kernel
  ``d G+(x, y) / d nu(x)``.  The kernel is continuous; its diagonal is the
  curvature limit ``kappa / (4 pi)`` minus the image contribution.

Densities are node values; the duality pairing is ``(u, v) = sum w u v``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from .geometry import ParticleBoundary, fourier_resample
from .green import FOUR_PI, REMAINDER_AT_ZERO, _core
from .kernels import halfspace_pair

log = logging.getLogger(__name__)


class UnderResolvedError(RuntimeError):
    """The discrete energy form is not positive definite on zero-mean densities."""

    def __init__(self, smallest):
        super().__init__(
            f"H*_0 Gram matrix is not positive definite (smallest eigenvalue {smallest:.3e}); "
            "increase the number of boundary nodes"
        )
        self.smallest = smallest


def kress_weights(n):
    """Kress weights ``R_k``, ``k = 0..n-1``, for ``log(4 sin^2((t - s)/2))`` on ``n`` nodes.

    ``int_0^{2pi} log(4 sin^2((t_i - s)/2)) f(s) ds ~ sum_j R_{|i-j|} f(t_j)``,
    exact for trigonometric polynomials of degree below ``n/2``.
    """
    if n % 2:
        raise ValueError("Kress quadrature needs an even number of nodes")
    half = n // 2
    k = np.arange(n)
    m = np.arange(1, half)
    ang = 2.0 * np.pi * np.outer(k, m) / n
    r = -(2.0 * np.pi / half) * (np.cos(ang) / m).sum(axis=1)
    r -= (np.pi / half**2) * np.cos(np.pi * k)
    return r


def _circulant(row):
    n = row.shape[0]
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return row[idx]


def _image_self(x2):
    """Image term ``G(0, -2 x2)`` at each node and its target gradient."""
    g, g1, g2 = _core(np.zeros_like(x2), -2.0 * x2)
    # d/dx2 of G(x1 - y1, -x2 - y2) picks up a minus sign
    return g, g1, -g2


def assemble_single_layer(boundary: ParticleBoundary) -> np.ndarray:
    """Dense Nystrom matrix of the half-space periodic single-layer operator."""
    x = boundary.points
    w = boundary.weights
    g, _, _ = halfspace_pair(x[:, 0], x[:, 1], x[:, 0], x[:, 1], grad=False)
    S = g * w[None, :]
    for c, sl in zip(boundary.curves, boundary.slices):
        n = c.n
        t = c.param
        dt = t[:, None] - t[None, :]
        np.fill_diagonal(dt, 1.0)
        log_sin = np.log(4.0 * np.sin(0.5 * dt) ** 2)
        smooth = g[sl, sl] - log_sin / FOUR_PI
        img = _image_self(c.points[:, 1])[0]
        diag = np.log(c.speed**2) / FOUR_PI + REMAINDER_AT_ZERO - img
        np.fill_diagonal(smooth, diag)
        rk = _circulant(kress_weights(n))
        S[sl, sl] = (rk / FOUR_PI + (2.0 * np.pi / n) * smooth) * c.speed[None, :]
    return S


def assemble_np(boundary: ParticleBoundary) -> np.ndarray:
    """Dense Nystrom matrix of the Neumann-Poincare type operator ``(K*)+``."""
    x = boundary.points
    nu = boundary.normal
    w = boundary.weights
    _, g1, g2 = halfspace_pair(x[:, 0], x[:, 1], x[:, 0], x[:, 1])
    kern = g1 * nu[:, 0:1] + g2 * nu[:, 1:2]
    _, m1, m2 = _image_self(x[:, 1])
    img_diag = m1 * nu[:, 0] + m2 * nu[:, 1]
    np.fill_diagonal(kern, boundary.curvature / FOUR_PI - img_diag)
    return kern * w[None, :]


def zero_mean_basis(weights):
    """Orthonormal (Euclidean) basis of ``{phi : sum w phi = 0}`` as an ``(n, n-1)`` array.

    Built from the Householder reflector that maps ``weights`` onto ``e_1``.
    """
    w = np.asarray(weights, dtype=float)
    u = w / np.linalg.norm(w)
    u[0] += 1.0
    u /= np.linalg.norm(u)
    H = np.eye(w.shape[0]) - 2.0 * np.outer(u, u)
    return H[:, 1:]


def h_star_gram(S, weights):
    """Gram matrix of ``(u, v) = -(u, S v)``, symmetrised.

    Raises :class:`UnderResolvedError` if it is not positive definite on the
    zero-mean subspace.
    """
    G = -np.asarray(weights)[:, None] * S
    G = 0.5 * (G + G.T)
    Q = zero_mean_basis(weights)
    smallest = float(linalg.eigvalsh(Q.T @ G @ Q, subset_by_index=[0, 0])[0])
    if smallest <= 0.0:
        raise UnderResolvedError(smallest)
    return G


@dataclass(frozen=True)
class PeriodicOperators:
    """Assembled operators for one boundary; wavelength independent."""

    boundary: ParticleBoundary
    S: np.ndarray
    K: np.ndarray

    @classmethod
    def assemble(cls, boundary):
        return cls(boundary, assemble_single_layer(boundary), assemble_np(boundary))

    @property
    def weights(self):
        return self.boundary.weights

    @cached_property
    def gram(self):
        return h_star_gram(self.S, self.weights)

    @cached_property
    def zero_mean(self):
        return zero_mean_basis(self.weights)

    @cached_property
    def P0(self):
        """Projector removing the mean: ``phi - (sum w phi / sum w) 1``."""
        w = self.weights
        return np.eye(w.shape[0]) - np.outer(np.ones_like(w), w) / w.sum()

    def adjoint_K(self):
        """Matrix of the L2(dsigma)-adjoint ``K`` of ``K*``."""
        w = self.weights
        return (self.K.T * w[None, :]) / w[:, None]

    def calderon_residual(self):
        """``||K S - S K*|| / ||S||`` in the Frobenius norm."""
        r = self.adjoint_K() @ self.S - self.S @ self.K
        return float(np.linalg.norm(r) / np.linalg.norm(self.S))

    def symmetry_defect(self):
        """Relative asymmetry of ``W S``."""
        ws = self.weights[:, None] * self.S
        return float(np.linalg.norm(ws - ws.T) / np.linalg.norm(ws))

    def pairing(self, u, v):
        """Duality pairing ``int u v dsigma`` (bilinear, no conjugation)."""
        return np.tensordot(self.weights * np.asarray(u).T, v, axes=1) if np.ndim(u) > 1 \
            else np.sum(self.weights * u * v)

    def h_inner(self, u, v):
        """``(u, v)_{H*_0} = -(u, S v)`` with the symmetrised Gram."""
        return np.asarray(u).T @ self.gram @ np.asarray(v)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of ``(K*)+`` that are orthonormal in ``H*_0``.

    ``eigenvectors[:, j]`` holds node values of ``phi_j``; eigenvalues are
    sorted by decreasing magnitude.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gram: np.ndarray

    def orthonormality_defect(self):
        P = self.eigenvectors
        return float(np.abs(P.T @ self.gram @ P - np.eye(P.shape[1])).max())


def eigendecompose(ops: PeriodicOperators) -> SpectralDecomposition:
    """Self-adjoint eigendecomposition of ``(K*)+`` in ``H*_0``.

    With ``G`` the Gram matrix, ``G K*`` is symmetric up to discretisation
    error (Calderon identity).  Both are restricted to the zero-mean
    subspace, ``G_r = L L^T`` is factored, and the symmetric matrix
    ``L^-1 (G K*)_r L^-T`` is diagonalised; the eigenvectors map back to
    densities that are ``G``-orthonormal.
    """
    G = ops.gram
    Q = ops.zero_mean
    M = G @ ops.K
    M = 0.5 * (M + M.T)
    Gr = Q.T @ G @ Q
    Mr = Q.T @ M @ Q
    try:
        L = linalg.cholesky(Gr, lower=True)
    except linalg.LinAlgError:
        log.warning("Cholesky of the H*_0 Gram failed; using a general eigensolver")
        lam, C = linalg.eig(Mr, Gr)
        lam, C = lam.real, C.real
        norms = np.sqrt(np.abs(np.einsum("ij,ik,kj->j", C, Gr, C)))
        C = C / norms
    else:
        Linv_M = linalg.solve_triangular(L, Mr, lower=True)
        A = linalg.solve_triangular(L, Linv_M.T, lower=True)
        lam, Y = linalg.eigh(0.5 * (A + A.T))
        C = linalg.solve_triangular(L.T, Y, lower=False)
    order = np.argsort(-np.abs(lam), kind="stable")
    return SpectralDecomposition(lam[order], Q @ C[:, order], G)


def _upsampled(boundary, m):
    """Band-limited upsampling of nodes and trapezoidal weights, per component."""
    pts, ws = [], []
    for c in boundary.curves:
        mm = max(m, c.n)
        dv = fourier_resample(c.deriv, mm)
        pts.append(fourier_resample(c.points, mm))
        ws.append(2.0 * math.pi / mm * np.hypot(dv[:, 0], dv[:, 1]))
    return pts, ws


def single_layer_potential(boundary, density, targets, upsample=None, grad=False):
    """Evaluate ``S+[density]`` (and optionally its gradient) at off-boundary targets.

    ``upsample`` gives the number of quadrature nodes per component after
    band-limited interpolation of geometry and density; use it for targets
    close to the boundary.  The plain trapezoidal rule is used otherwise.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    density = np.asarray(density)
    if upsample is None:
        srcs = [boundary.points]
        wts = [boundary.weights]
        dens = [density]
    else:
        srcs, wts = _upsampled(boundary, upsample)
        dens = [fourier_resample(density[sl], s.shape[0]) for sl, s in zip(boundary.slices, srcs)]
    chunk = max(1, 2_000_000 // max(1, sum(s.shape[0] for s in srcs)))
    out_v, out_g = [], []
    for start in range(0, targets.shape[0], chunk):
        tt = targets[start:start + chunk]
        val = 0.0
        gx = gy = 0.0
        for s, w, dn in zip(srcs, wts, dens):
            g, g1, g2 = halfspace_pair(tt[:, 0], tt[:, 1], s[:, 0], s[:, 1], grad=grad)
            q = w * dn
            val = val + g @ q
            if grad:
                gx = gx + g1 @ q
                gy = gy + g2 @ q
        out_v.append(val)
        if grad:
            out_g.append(np.stack([gx, gy], axis=-1))
    values = np.concatenate(out_v)
    if grad:
        return values, np.concatenate(out_g)
    return values
