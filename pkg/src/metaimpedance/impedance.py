"""Material dispersion, the cell corrector and the effective impedance.

Conventions
-----------
Time dependence ``exp(-i omega t)``; the particle carries the Drude
dispersion in ``mu_c`` (``Im mu_c > 0``).  The cell corrector ``alpha`` is
``S+[phi]`` where ``phi`` solves

    (lam I - (K*)+) phi = nu_2,   lam = (mu_c + mu_m) / (2 (mu_m - mu_c)),

which is what the flux condition with ``1/mu`` weights gives after the jump
relations.  ``MaterialState.lambda_mu`` keeps the customary contrast
``(mu_c + mu_m) / (2 (mu_c - mu_m))``; the resolvent parameter is its
negative, ``MaterialState.resolvent_lambda``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .operators import PeriodicOperators, SpectralDecomposition, single_layer_potential

log = logging.getLogger(__name__)

HC_EV_NM = 1239.841984  # h c in eV nm
C0 = 299_792_458.0
MU0 = 4e-7 * math.pi
EPS0 = 1.0 / (MU0 * C0**2)

WAVELENGTH_RANGE_NM = (300.0, 1500.0)


@dataclass(frozen=True)
class DrudeParameters:
    """Drude model ``eps_inf - wp^2 / (w^2 + i gamma w)`` (energies in eV).

    ``eps_inf = 1`` is the plain free-electron model.
    """

    hbar_omega_p: float = 9.02
    hbar_gamma: float = 0.027
    eps_inf: float = 1.0

    def relative(self, hbar_omega):
        w = hbar_omega
        return self.eps_inf - self.hbar_omega_p**2 / (w * w + 1j * self.hbar_gamma * w)


@dataclass(frozen=True)
class MaterialState:
    """Matrix and particle parameters at one wavelength (SI units)."""

    wavelength: float
    omega: float
    eps_m: float
    mu_m: float
    eps_c: complex
    mu_c: complex

    @property
    def lambda_mu(self):
        """Contrast ``(mu_c + mu_m) / (2 (mu_c - mu_m))``; ``Im < 0`` for a lossy particle."""
        if self.mu_c == self.mu_m:
            return math.inf
        return (self.mu_c + self.mu_m) / (2.0 * (self.mu_c - self.mu_m))

    @property
    def resolvent_lambda(self):
        """Parameter ``lam`` of ``(lam I - K*) phi = nu_2`` for the cell corrector."""
        return -self.lambda_mu

    @property
    def mu_ratio(self):
        """``mu_m / mu_c``, the interior coefficient relative to the matrix."""
        return self.mu_m / self.mu_c

    @property
    def k_m(self):
        return self.omega * math.sqrt(self.eps_m * self.mu_m)

    @property
    def k_c(self):
        # stored for completeness; the cell problem is quasi-static
        return self.omega * np.sqrt(self.eps_c * self.mu_c)


def drude_gold(wavelength, params=None):
    """Material state of a gold particle in vacuum at ``wavelength`` (meters).

    The Drude factor multiplies ``mu_0`` for the particle permeability (the
    plasmonic coefficient of the scalar model) and ``eps_0`` for its
    permittivity, which does not enter the cell problem.
    """
    params = params or DrudeParameters()
    nm = wavelength * 1e9
    lo, hi = WAVELENGTH_RANGE_NM
    if not (lo - 1e-9 <= nm <= hi + 1e-9):
        raise ValueError(f"wavelength {nm:.3f} nm outside the Drude range [{lo}, {hi}] nm")
    rel = params.relative(HC_EV_NM / nm)
    omega = 2.0 * math.pi * C0 / wavelength
    return MaterialState(wavelength, omega, EPS0, MU0, EPS0 * rel, MU0 * rel)


@dataclass(frozen=True)
class ImpedanceResult:
    """Effective impedance at one wavelength.

    ``mode_contributions`` lists ``(lambda_j, term_j)`` (spectral path only),
    with ``alpha_inf = sum term_j``.
    """

    alpha_inf: complex
    lam: complex
    solver_path: str
    wavelength: float = float("nan")
    density: np.ndarray | None = field(default=None, repr=False, compare=False)
    mode_contributions: tuple = field(default=(), repr=False, compare=False)

    @property
    def impedance_z(self):
        return -self.alpha_inf

    def dominant_mode(self):
        """Index and eigenvalue of the largest-magnitude contribution, or ``(-1, nan)``."""
        if not self.mode_contributions:
            return -1, float("nan")
        mags = [abs(t) for _, t in self.mode_contributions]
        j = int(np.argmax(mags))
        return j, float(self.mode_contributions[j][0])


class NearSingularError(RuntimeError):
    pass


def solve_density(ops: PeriodicOperators, lam, rhs=None):
    """Density ``phi`` with ``(lam I - K*) phi = rhs`` (default ``rhs = nu_2``)."""
    if rhs is None:
        rhs = ops.boundary.normal[:, 1]
    A = lam * np.eye(len(ops.boundary)) - ops.P0 @ ops.K @ ops.P0
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e13:
        ev = np.linalg.eigvals(ops.K)
        gap = float(np.min(np.abs(ev - lam)))
        raise NearSingularError(f"lam = {lam} is {gap:.2e} from the spectrum of K*")
    return np.linalg.solve(A, ops.P0 @ rhs)


def alpha_inf_direct(ops: PeriodicOperators, lam, wavelength=float("nan")) -> ImpedanceResult:
    """``alpha_inf = -int y_2 (lam I - K*)^-1[nu_2] dsigma`` by a dense solve.

    An infinite ``lam`` (no contrast) gives ``phi = 0`` and ``alpha_inf = 0``.
    """
    if math.isinf(abs(lam)):
        return ImpedanceResult(0j, lam, "direct", wavelength, density=np.zeros(len(ops.boundary), complex))
    phi = solve_density(ops, lam)
    y2 = ops.boundary.points[:, 1]
    alpha = -complex(np.sum(ops.weights * y2 * phi))
    return ImpedanceResult(alpha, lam, "direct", wavelength, density=phi)


@dataclass(frozen=True)
class ModalData:
    """Per-mode couplings of ``nu_2`` and ``y_2``, independent of the wavelength.

    ``c_nu`` is ``(phi_j, nu_2)_{H*_0}``; ``c_y`` the duality pairing
    ``(phi_j, y_2)`` and ``c_y_ibp`` its integration-by-parts value
    ``c_nu / (1/2 - lambda_j)``.
    """

    eigenvalues: np.ndarray
    c_nu: np.ndarray
    c_y: np.ndarray
    c_y_ibp: np.ndarray

    @classmethod
    def from_spectrum(cls, spec: SpectralDecomposition, boundary):
        phi = spec.eigenvectors
        nu2 = boundary.normal[:, 1]
        y2 = boundary.points[:, 1]
        c_nu = phi.T @ spec.gram @ nu2
        c_y = phi.T @ (boundary.weights * y2)
        gap = 0.5 - spec.eigenvalues
        # a mode at exactly 1/2 has no zero-mean partner; leave its route undefined
        safe = np.where(gap != 0.0, gap, 1.0)
        return cls(spec.eigenvalues, c_nu, c_y, np.where(gap != 0.0, c_nu / safe, np.nan))

    def identity_defect(self, n_modes=None, zero_tol=1e-10):
        """Mismatch of the two ``(phi_j, y_2)`` routes per mode.

        Relative to the mode's own pairing when that is significant; pairings
        below ``zero_tol * max|c_y|`` on both routes vanish by symmetry and
        are compared on the global scale ``max|c_y|``.
        """
        sl = slice(None, n_modes)
        a, b = self.c_y[sl], self.c_y_ibp[sl]
        glob = float(np.max(np.abs(self.c_y)))
        own = np.maximum(np.abs(a), np.abs(b))
        scale = np.where(own >= zero_tol * glob, own, glob)
        return np.abs(a - b) / scale

    def terms(self, lam):
        return -self.c_nu * self.c_y / (lam - self.eigenvalues)


def alpha_inf_spectral(spec: SpectralDecomposition, boundary, lam, wavelength=float("nan"),
                       modal: ModalData | None = None) -> ImpedanceResult:
    """Eigen-expansion ``alpha_inf = -sum_j (phi_j, nu_2)_H (phi_j, y_2) / (lam - lambda_j)``."""
    modal = modal or ModalData.from_spectrum(spec, boundary)
    terms = modal.terms(lam)
    contrib = tuple((float(l), complex(t)) for l, t in zip(modal.eigenvalues, terms))
    return ImpedanceResult(complex(terms.sum()), lam, "spectral", wavelength,
                           mode_contributions=contrib)


def corrector_field(ops: PeriodicOperators, lam, targets, density=None, upsample=None):
    """Cell corrector ``alpha = S+[(lam I - K*)^-1 nu_2]`` at ``targets``.

    Targets closer than two node spacings to the boundary trigger a warning
    unless ``upsample`` is given.
    """
    b = ops.boundary
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if np.any(targets[:, 1] < 0):
        raise ValueError("corrector targets must lie above the plate")
    if density is None:
        density = solve_density(ops, lam)
    if upsample is None:
        spacing = float(np.max(b.weights))
        dist = np.min(np.hypot(targets[:, None, 0] - b.points[None, :, 0],
                               targets[:, None, 1] - b.points[None, :, 1]), axis=1)
        if np.any(dist < 2.0 * spacing):
            log.warning("corrector evaluated within two node spacings of the boundary; "
                        "pass upsample= for accurate near-field values")
    return single_layer_potential(b, density, targets, upsample=upsample)


def reflection_coefficient(z, k_m, incidence, delta):
    """Plane-wave reflection coefficient of ``u + delta z du/dx2 = 0`` on ``x2 = 0``.

    ``u = exp(i k d.x) + R exp(i k d'.x)`` with ``d' = (d1, -d2)`` gives
    ``R = -(1 + i delta z k d2) / (1 - i delta z k d2)``.
    """
    d = np.asarray(incidence, dtype=float)
    if delta <= 0:
        raise ValueError("delta must be positive")
    if d[1] >= 0 or not math.isclose(float(np.hypot(*d)), 1.0, rel_tol=1e-9):
        raise ValueError("incidence must be a downgoing unit vector")
    c = 1j * delta * z * k_m * d[1]
    den = 1.0 - c
    if abs(den) < 1e-12:
        raise ZeroDivisionError("impedance condition is singular for this incidence (|1 - i delta z k d2| ~ 0)")
    return -(1.0 + c) / den
