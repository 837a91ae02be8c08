"""Particle boundaries in the unit cell.

Each connected component of the particle boundary is a closed curve sampled
at ``n`` equispaced parameter values ``t_j = 2 pi j / n`` (counterclockwise).
The trapezoidal rule in ``t`` is spectrally accurate for these smooth periodic
integrands, which is what the Nystrom discretisations rely on.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from shapely.geometry import Polygon

#: minimal distance to the plate x2 = 0 and to the cell walls x1 = +-1/2
CELL_MARGIN = 1e-3


class GeometryError(ValueError):
    """Invalid particle geometry (cell violation, overlap, self-intersection)."""


def fourier_derivative(values, order=1):
    """Spectral derivative in the parameter of samples on ``[0, 2 pi)``.

    ``values`` has the samples along axis 0.  The Nyquist mode is dropped for
    odd-order derivatives so real data stays real.
    """
    values = np.asarray(values)
    n = values.shape[0]
    k = np.fft.fftfreq(n, d=1.0 / n)
    if order % 2 == 1 and n % 2 == 0:
        k[n // 2] = 0.0
    mult = (1j * k) ** order
    mult = mult.reshape((-1,) + (1,) * (values.ndim - 1))
    out = np.fft.ifft(mult * np.fft.fft(values, axis=0), axis=0)
    return out.real if np.isrealobj(values) else out


def fourier_resample(values, m):
    """Band-limited interpolation of periodic samples onto ``m >= n`` equispaced points."""
    values = np.asarray(values)
    n = values.shape[0]
    if m < n:
        raise ValueError("fourier_resample only upsamples")
    if m == n:
        return values.copy()
    coef = np.fft.fft(values, axis=0)
    out = np.zeros((m,) + values.shape[1:], dtype=complex)
    half = n // 2
    out[:half] = coef[:half]
    out[m - half + 1:] = coef[n - half + 1:]
    if n % 2 == 0:
        # split the Nyquist mode symmetrically
        out[half] = 0.5 * coef[half]
        out[m - half] = 0.5 * coef[half]
    else:
        out[half] = coef[half]
        out[m - half] = coef[n - half]
    out = np.fft.ifft(out, axis=0) * (m / n)
    return out.real if np.isrealobj(values) else out


@dataclass(frozen=True)
class BoundaryCurve:
    """One closed counterclockwise component of the particle boundary.

    ``points``, ``deriv`` and ``deriv2`` are ``(n, 2)`` arrays of the curve and
    its first two parameter derivatives at the nodes.  ``descriptor`` records
    how the curve was built (for configs and logs).
    """

    points: np.ndarray
    deriv: np.ndarray
    deriv2: np.ndarray
    descriptor: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_samples(cls, points, descriptor=None):
        """Build a curve from node coordinates using spectral differentiation."""
        points = np.asarray(points, dtype=float)
        return cls(
            points,
            fourier_derivative(points, 1),
            fourier_derivative(points, 2),
            descriptor or {"kind": "samples"},
        )

    @property
    def n(self):
        return self.points.shape[0]

    @cached_property
    def param(self):
        return 2.0 * np.pi * np.arange(self.n) / self.n

    @cached_property
    def speed(self):
        return np.hypot(self.deriv[:, 0], self.deriv[:, 1])

    @cached_property
    def tangent(self):
        return self.deriv / self.speed[:, None]

    @cached_property
    def normal(self):
        # outward for a counterclockwise curve
        tau = self.tangent
        return np.column_stack([tau[:, 1], -tau[:, 0]])

    @cached_property
    def curvature(self):
        d, dd = self.deriv, self.deriv2
        return (d[:, 0] * dd[:, 1] - d[:, 1] * dd[:, 0]) / self.speed**3

    @cached_property
    def weights(self):
        return 2.0 * np.pi / self.n * self.speed

    def area(self):
        """Enclosed area from the trapezoidal rule on ``(x1 x2' - x2 x1')/2``."""
        x, d = self.points, self.deriv
        return 0.5 * np.sum(x[:, 0] * d[:, 1] - x[:, 1] * d[:, 0]) * 2.0 * np.pi / self.n

    def perimeter(self):
        return float(np.sum(self.weights))

    def polygon(self):
        return Polygon(self.points)


def _check_cell(points, what="curve"):
    x1, x2 = points[:, 0], points[:, 1]
    if np.min(x2) < CELL_MARGIN:
        raise GeometryError(f"{what} comes within {CELL_MARGIN} of the plate x2 = 0")
    if np.max(np.abs(x1)) > 0.5 - CELL_MARGIN:
        raise GeometryError(f"{what} comes within {CELL_MARGIN} of the cell walls x1 = +-1/2")


def _check_simple(curve, what="curve"):
    if np.min(curve.speed) <= 0.0 or curve.area() <= 0.0:
        raise GeometryError(f"{what} is degenerate or not counterclockwise")
    if not curve.polygon().is_valid:
        raise GeometryError(f"{what} self-intersects")


class ParticleBoundary:
    """Boundary of the particle in the unit cell, possibly with several components.

    Node data of all components is concatenated; ``slices[c]`` selects the
    nodes of component ``c``.  Instances are treated as immutable.
    """

    def __init__(self, curves):
        curves = list(curves)
        if not curves:
            raise GeometryError("a particle needs at least one boundary component")
        self.curves = tuple(curves)
        offsets = np.cumsum([0] + [c.n for c in curves])
        self.slices = tuple(slice(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:]))
        self.points = np.concatenate([c.points for c in curves])
        self.normal = np.concatenate([c.normal for c in curves])
        self.tangent = np.concatenate([c.tangent for c in curves])
        self.curvature = np.concatenate([c.curvature for c in curves])
        self.weights = np.concatenate([c.weights for c in curves])
        self.speed = np.concatenate([c.speed for c in curves])
        for arr in (self.points, self.normal, self.tangent, self.curvature, self.weights, self.speed):
            arr.setflags(write=False)

    def __len__(self):
        return self.points.shape[0]

    def __repr__(self):
        kinds = ", ".join(c.descriptor.get("kind", "?") for c in self.curves)
        return f"ParticleBoundary([{kinds}], n={len(self)})"

    @property
    def n_components(self):
        return len(self.curves)

    def area(self):
        return float(sum(c.area() for c in self.curves))

    def perimeter(self):
        return float(np.sum(self.weights))

    def integrate(self, values):
        """Trapezoidal integral of node values over the whole boundary."""
        return np.tensordot(self.weights, values, axes=(0, 0))

    def tangential_derivative(self, values):
        """Arclength derivative of node values, component by component."""
        values = np.asarray(values)
        out = np.empty_like(values)
        for sl in self.slices:
            d = fourier_derivative(values[sl], 1)
            out[sl] = d / self.speed[sl].reshape((-1,) + (1,) * (values.ndim - 1))
        return out

    def descriptors(self):
        return [dict(c.descriptor) for c in self.curves]

    def validate(self):
        for i, c in enumerate(self.curves):
            _check_cell(c.points, f"component {i}")
            _check_simple(c, f"component {i}")
        polys = [c.polygon() for c in self.curves]
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                if polys[i].intersects(polys[j]):
                    raise GeometryError(f"components {i} and {j} overlap")
        return self


def _star_curve(center, base_radius, amplitude, lobes, n, kind):
    t = 2.0 * np.pi * np.arange(n) / n
    r = base_radius + amplitude * np.cos(lobes * t)
    dr = -amplitude * lobes * np.sin(lobes * t)
    ddr = -amplitude * lobes**2 * np.cos(lobes * t)
    c, s = np.cos(t), np.sin(t)
    points = np.column_stack([center[0] + r * c, center[1] + r * s])
    deriv = np.column_stack([dr * c - r * s, dr * s + r * c])
    deriv2 = np.column_stack([
        ddr * c - 2.0 * dr * s - r * c,
        ddr * s + 2.0 * dr * c - r * s,
    ])
    desc = {"kind": kind, "center": [float(center[0]), float(center[1])], "n_nodes": int(n)}
    if kind == "disk":
        desc["radius"] = float(base_radius)
    else:
        desc.update(base_radius=float(base_radius), amplitude=float(amplitude), lobes=int(lobes))
    return BoundaryCurve(points, deriv, deriv2, desc)


def make_disk(center, radius, n_nodes):
    """Disk boundary with exact normals and curvature ``1/radius``."""
    if radius <= 0:
        raise GeometryError("radius must be positive")
    if n_nodes < 4 or n_nodes % 2:
        raise GeometryError("n_nodes must be an even integer >= 4")
    curve = _star_curve(center, radius, 0.0, 0, n_nodes, "disk")
    return ParticleBoundary([curve]).validate()


def make_star(center, base_radius, amplitude, lobes, n_nodes):
    """Star-shaped curve ``r(theta) = base_radius + amplitude cos(lobes theta)``."""
    if base_radius <= 0:
        raise GeometryError("base_radius must be positive")
    if abs(amplitude) >= base_radius:
        raise GeometryError("|amplitude| must be below base_radius (curve would self-intersect)")
    if n_nodes < 4 or n_nodes % 2:
        raise GeometryError("n_nodes must be an even integer >= 4")
    if amplitude == 0:
        return make_disk(center, base_radius, n_nodes)
    curve = _star_curve(center, base_radius, amplitude, lobes, n_nodes, "star")
    return ParticleBoundary([curve]).validate()


def make_multi(parts):
    """Combine single- or multi-component boundaries into one particle."""
    parts = list(parts)
    if len(parts) == 1:
        return parts[0]
    curves = [c for p in parts for c in p.curves]
    return ParticleBoundary(curves).validate()


@dataclass(frozen=True)
class NormalPerturbation:
    """Normal displacement field ``h`` at the nodes, scaled by the step ``eta``."""

    h: np.ndarray
    eta: float = 1.0


def perturb(boundary, pert):
    """Move every node along its normal by ``eta * h`` and rebuild the geometry.

    Normals, curvature and weights of the result come from spectral
    differentiation of the displaced node coordinates.
    """
    h = np.asarray(pert.h, dtype=float)
    if h.shape != (len(boundary),):
        raise ValueError(f"h has shape {h.shape}, expected ({len(boundary)},)")
    if not np.any(h) or pert.eta == 0:
        return boundary
    moved = boundary.points + pert.eta * h[:, None] * boundary.normal
    curves = []
    for c, sl in zip(boundary.curves, boundary.slices):
        desc = dict(c.descriptor)
        desc["kind"] = "perturbed"
        curves.append(BoundaryCurve.from_samples(moved[sl], desc))
    return ParticleBoundary(curves).validate()


def radial_boundary_coefficients(boundary, n_modes=16):
    """Fourier coefficients of each component's ``x1 + i x2`` samples (for logs).

    Returns a list with, per component, the complex coefficients of modes
    ``-n_modes..n_modes``.
    """
    out = []
    for c in boundary.curves:
        z = c.points[:, 0] + 1j * c.points[:, 1]
        coef = np.fft.fft(z) / c.n
        k = np.fft.fftfreq(c.n, d=1.0 / c.n).astype(int)
        sel = np.abs(k) <= n_modes
        order = np.argsort(k[sel])
        out.append((k[sel][order], coef[sel][order]))
    return out
