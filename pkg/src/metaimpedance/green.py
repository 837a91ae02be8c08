"""1-d periodic Laplace Green function and its half-space Dirichlet variant.

All functions work in cell coordinates (period 1 along x1) and broadcast over
numpy arrays.  The closed form

    G(x) = log(sinh^2(pi x2) + sin^2(pi x1)) / (4 pi)

is evaluated through the factorisation

    G(x) = (a - 2 log 2 + log D) / (4 pi),   a = 2 pi |x2|,
    D = expm1(-a)^2 + 4 exp(-a) sin^2(pi x1),

which never overflows and keeps full relative accuracy near the lattice
points, so no separate large-|x2| branch is needed.
"""
from __future__ import annotations

import math

import numpy as np

FOUR_PI = 4.0 * math.pi
LOG2 = math.log(2.0)

#: offsets closer than this to a lattice point (n, 0) are treated as singular
LATTICE_TOL = 1e-12

#: value of the smooth remainder G - log|x|/(2 pi) at x = 0
REMAINDER_AT_ZERO = math.log(math.pi**2) / FOUR_PI


class SingularPointError(ValueError):
    """Raised when a Green function is evaluated on its lattice singularity."""


def wrap_x1(x1):
    """Canonical representative of ``x1`` modulo 1 in (-1/2, 1/2]."""
    x1 = np.asarray(x1, dtype=float)
    return x1 - np.ceil(x1 - 0.5)


def _core(d1, d2, grad=True):
    """Value and gradient of the periodic Green function, no singularity checks.

    Returns ``(g, g1, g2)``; ``g1``/``g2`` are ``None`` when ``grad`` is false.
    Lattice points produce ``-inf`` for the value and ``nan`` for the gradient.
    """
    d1 = wrap_x1(d1)
    d2 = np.asarray(d2, dtype=float)
    a = 2.0 * np.pi * np.abs(d2)
    e = np.exp(-a)
    s = np.sin(np.pi * d1)
    dd = np.expm1(-a) ** 2 + 4.0 * e * s * s
    with np.errstate(divide="ignore", invalid="ignore"):
        g = (a - 2.0 * LOG2 + np.log(dd)) / FOUR_PI
        if not grad:
            return g, None, None
        g1 = np.sin(2.0 * np.pi * d1) * e / dd
        g2 = np.sign(d2) * (-np.expm1(-2.0 * a)) / (2.0 * dd)
    return g, g1, g2


def _near_lattice(d1, d2):
    return np.hypot(wrap_x1(d1), np.asarray(d2, dtype=float)) < LATTICE_TOL


def _check(d1, d2):
    if np.any(_near_lattice(d1, d2)):
        raise SingularPointError("offset coincides with a lattice point (n, 0)")


def g_periodic(x1, x2):
    """Periodic Green function ``log(sinh^2(pi x2) + sin^2(pi x1)) / (4 pi)``."""
    _check(x1, x2)
    g, _, _ = _core(x1, x2, grad=False)
    return g[()] if np.ndim(g) == 0 else g


def grad_g_periodic(x1, x2):
    """Gradient of :func:`g_periodic`, returned as a ``(..., 2)`` array."""
    _check(x1, x2)
    _, g1, g2 = _core(x1, x2)
    return np.stack(np.broadcast_arrays(g1, g2), axis=-1)


def g_periodic_fourier(x1, x2, n_terms):
    """Truncated Fourier series of the periodic Green function.

    ``|x2|/2 - log 2/(2 pi) - sum_{n=1}^{N} exp(-2 pi n |x2|) cos(2 pi n x1)/(2 pi n)``

    Built term by term from the Fourier coefficients of the periodic problem;
    used as an oracle for the closed form.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    x1 = np.asarray(x1, dtype=float)
    x2 = np.abs(np.asarray(x2, dtype=float))
    if np.any(x2 == 0.0):
        raise ValueError("the Fourier series needs x2 != 0")
    n = np.arange(1, n_terms + 1, dtype=float).reshape((-1,) + (1,) * max(x1.ndim, x2.ndim))
    terms = np.exp(-2.0 * np.pi * n * x2) * np.cos(2.0 * np.pi * n * x1) / (2.0 * np.pi * n)
    # sum smallest terms first
    out = 0.5 * x2 - LOG2 / (2.0 * np.pi) - terms[::-1].sum(axis=0)
    return out[()] if np.ndim(out) == 0 else out


def g_halfspace(target, source):
    """Dirichlet Green function of the periodic upper half plane.

    ``target`` and ``source`` are ``(..., 2)`` arrays of cell points.  The
    image term uses the bitwise-same offset as the direct term on ``x2 = 0``,
    so the trace on the plate is exactly zero.
    """
    t = np.asarray(target, dtype=float)
    s = np.asarray(source, dtype=float)
    d1 = t[..., 0] - s[..., 0]
    _check(d1, t[..., 1] - s[..., 1])
    g, _, _ = _core(d1, t[..., 1] - s[..., 1], grad=False)
    gi, _, _ = _core(d1, -t[..., 1] - s[..., 1], grad=False)
    out = g - gi
    return out[()] if np.ndim(out) == 0 else out


def grad_g_halfspace(target, source):
    """Gradient with respect to ``target`` of :func:`g_halfspace`, shape ``(..., 2)``."""
    t = np.asarray(target, dtype=float)
    s = np.asarray(source, dtype=float)
    d1 = t[..., 0] - s[..., 0]
    _check(d1, t[..., 1] - s[..., 1])
    _, g1, g2 = _core(d1, t[..., 1] - s[..., 1])
    _, m1, m2 = _core(d1, -t[..., 1] - s[..., 1])
    # d/dt2 of G(t1 - s1, -t2 - s2) picks up a minus sign
    return np.stack(np.broadcast_arrays(g1 - m1, g2 + m2), axis=-1)


def _shc(t):
    """sinh(t)/t with the removable singularity filled in."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 1e-4
    safe = np.where(small, 1.0, t)
    return np.where(small, 1.0 + t * t / 6.0, np.sinh(safe) / safe)


def kernel_split(x1, x2):
    """Split ``G = log|x|/(2 pi) + R`` into its logarithmic part and smooth remainder.

    Near the origin the remainder is computed from the ratio
    ``(sinh^2(pi x2) + sin^2(pi x1)) / |x|^2`` rather than by subtraction, so it
    is accurate up to and including ``x = 0`` where it equals
    ``log(pi^2)/(4 pi)``.  Returns ``(log_part, remainder)``; ``log_part`` is
    ``-inf`` at the origin.  ``x1`` is not wrapped: the split is local.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    r2 = x1 * x1 + x2 * x2
    near = r2 < 0.25
    with np.errstate(divide="ignore", invalid="ignore"):
        log_part = np.log(r2) / FOUR_PI
        num = x2 * x2 * _shc(np.pi * x2) ** 2 + x1 * x1 * np.sinc(x1) ** 2
        ratio = np.where(r2 > 0.0, num / np.where(r2 > 0.0, r2, 1.0), 1.0)
        rem_near = np.log(np.pi**2 * ratio) / FOUR_PI
        g_far, _, _ = _core(x1, x2, grad=False)
        rem_far = g_far - log_part
    remainder = np.where(near, rem_near, rem_far)
    if remainder.ndim == 0:
        return log_part[()], remainder[()]
    return log_part, remainder
