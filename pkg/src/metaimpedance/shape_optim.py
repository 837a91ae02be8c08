"""Shape derivative of the effective impedance and gradient ascent on ``J = |alpha_inf|^2 / 2``.

Auxiliary fields
----------------
``v`` is the transmission solution driven by ``x_2``: harmonic on both sides
of the particle boundary, continuous across it, with

    dv/dnu|+ = (mu_m/mu_c) dv/dnu|-,

and ``v - x_2`` bounded as ``x_2 -> inf`` (it tends to ``alpha_inf``).  With
``v = x_2 + S+[psi]`` the flux condition and the jump relations give

    (lam I - K*) psi = nu_2,   lam = (mu_c + mu_m) / (2 (mu_m - mu_c)),

so ``psi`` is exactly the corrector density and ``v = x_2 + alpha``.

``w`` carries the jump in the trace instead, ``(mu_m/mu_c) w|+ = w|-``,
with continuous flux.  Both conditions hold for the interior rescaling

    w = v outside the particle,   w = (mu_m/mu_c) v inside,

which is the representation used here: ``w`` shares the density ``psi`` and
its interior traces are those of ``v`` times ``mu_m/mu_c``.

Shape derivative
----------------
For a normal displacement ``h`` the first variation is
``d alpha_inf[h] = int h * density dsigma`` with

    density = (1 - k) [dv/dnu|- dw/dnu|- + (1/k) dv/dtau|- dw/dtau|-],
    k = mu_m / mu_c.

The prefactor ``1 - k`` is fixed by the finite-difference oracle (moving the
boundary and re-solving); the opposite sign ``k - 1`` describes the
derivative of ``-alpha_inf``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import GeometryError, NormalPerturbation, perturb, radial_boundary_coefficients
from .impedance import MaterialState, alpha_inf_direct, solve_density
from .operators import PeriodicOperators

log = logging.getLogger(__name__)

#: number of Fourier modes (per component) in the perturbation basis
DEFAULT_MODES = 16


@dataclass(frozen=True)
class AuxiliaryFields:
    """Density and interior boundary traces of ``v`` or ``w`` at the nodes.

    The field is ``x_2 + S+[density]`` outside the particle and
    ``interior_scale * (x_2 + S+[density])`` inside.
    """

    density: np.ndarray
    trace: np.ndarray
    dnu_minus: np.ndarray
    dtau_minus: np.ndarray
    interior_scale: complex = 1.0
    kind: str = "v"

    @property
    def v_density(self):
        return self.density

    @property
    def w_density(self):
        return self.density


@dataclass(frozen=True)
class ShapeGradient:
    """Node values of ``d alpha_inf`` and of ``Re(d alpha_inf * conj(alpha_inf))``."""

    density: np.ndarray
    j_gradient: np.ndarray
    alpha_inf: complex

    def directional(self, boundary, h):
        """``int h * density dsigma`` for a normal displacement ``h``."""
        return complex(np.sum(boundary.weights * np.asarray(h) * self.density))


def _resolvent_lambda(mu_ratio):
    # lam = (mu_c + mu_m) / (2 (mu_m - mu_c)) written through k = mu_m / mu_c
    k = complex(mu_ratio)
    if k == 1.0:
        return math.inf
    return (1.0 + k) / (2.0 * (k - 1.0))


def solve_auxiliary_v(ops: PeriodicOperators, mu_ratio) -> AuxiliaryFields:
    """Solve the ``v`` problem for contrast ``mu_ratio = mu_m / mu_c``."""
    b = ops.boundary
    n = len(b)
    nu2 = b.normal[:, 1]
    lam = _resolvent_lambda(mu_ratio)
    if math.isinf(abs(lam)):
        psi = np.zeros(n, dtype=complex)
    else:
        psi = solve_density(ops, lam).astype(complex)
    trace = b.points[:, 1] + ops.S @ psi
    dnu = nu2 + (ops.K @ psi - 0.5 * psi)
    dtau = b.tangential_derivative(trace)
    return AuxiliaryFields(psi, trace, dnu, dtau, 1.0, "v")


def solve_auxiliary_w(ops: PeriodicOperators, mu_ratio, v: AuxiliaryFields | None = None) -> AuxiliaryFields:
    """Solve the ``w`` problem by interior rescaling of ``v`` (see module docstring)."""
    v = v if v is not None else solve_auxiliary_v(ops, mu_ratio)
    k = complex(mu_ratio)
    return AuxiliaryFields(v.density, k * v.trace, k * v.dnu_minus, k * v.dtau_minus, k, "w")


def auxiliary_field_values(ops: PeriodicOperators, fields: AuxiliaryFields, targets, inside,
                           upsample=None):
    """Evaluate ``v`` or ``w`` at ``targets``; ``inside`` flags points inside the particle."""
    from .operators import single_layer_potential

    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    base = targets[:, 1] + single_layer_potential(ops.boundary, fields.density, targets,
                                                   upsample=upsample)
    scale = np.where(np.asarray(inside, dtype=bool), fields.interior_scale, 1.0)
    return scale * base


def shape_derivative(v: AuxiliaryFields, w: AuxiliaryFields, mu_m, mu_c, alpha_inf) -> ShapeGradient:
    """Node values of the shape derivative of ``alpha_inf`` and of ``J``."""
    k = complex(mu_m / mu_c)
    density = (1.0 - k) * (v.dnu_minus * w.dnu_minus + v.dtau_minus * w.dtau_minus / k)
    jg = (density * np.conj(alpha_inf)).real
    return ShapeGradient(density, jg, complex(alpha_inf))


def evaluate(boundary, material: MaterialState):
    """Operators, ``alpha_inf`` and shape gradient for one boundary."""
    ops = PeriodicOperators.assemble(boundary)
    res = alpha_inf_direct(ops, material.resolvent_lambda, material.wavelength)
    v = solve_auxiliary_v(ops, material.mu_ratio)
    w = solve_auxiliary_w(ops, material.mu_ratio, v)
    grad = shape_derivative(v, w, material.mu_m, material.mu_c, res.alpha_inf)
    return ops, res, grad


def fourier_basis(boundary, n_modes=DEFAULT_MODES):
    """Columns ``1, cos(k t), sin(k t)`` (``k <= n_modes``) on each component, zero elsewhere."""
    cols = []
    for c, sl in zip(boundary.curves, boundary.slices):
        t = c.param
        kmax = min(n_modes, c.n // 2 - 1)
        blocks = [np.ones_like(t)]
        for k in range(1, kmax + 1):
            blocks += [np.cos(k * t), np.sin(k * t)]
        for blk in blocks:
            col = np.zeros(len(boundary))
            col[sl] = blk
            cols.append(col)
    return np.column_stack(cols)


def project_to_basis(boundary, values, n_modes=DEFAULT_MODES):
    """Weighted least-squares projection of node values onto :func:`fourier_basis`.

    The projection is orthogonal in ``L2(dsigma)``, so
    ``int P[g] g dsigma = ||P[g]||^2``.
    """
    B = fourier_basis(boundary, n_modes)
    sw = np.sqrt(boundary.weights)
    coef, *_ = np.linalg.lstsq(B * sw[:, None], np.asarray(values) * sw, rcond=None)
    return B @ coef


@dataclass
class AscentStep:
    iteration: int
    J: float
    grad_norm: float
    step: float
    boundary: object = field(repr=False)
    alpha_inf: complex = 0j


@dataclass
class AscentResult:
    trajectory: list
    status: str

    @property
    def final(self):
        return self.trajectory[-1]


@dataclass(frozen=True)
class StepRule:
    """Backtracking rule: start so that ``max |eta h| = initial_move``, then halve.

    A trial is accepted when ``J(eta) >= J + armijo * eta * dJ[h]``.
    """

    initial_move: float = 0.02
    armijo: float = 1e-4
    shrink: float = 0.5
    max_halvings: int = 30
    min_step: float = 1e-12


def ascend_j(boundary, material: MaterialState, steps, rule: StepRule | None = None,
             n_modes=DEFAULT_MODES, grad_tol=1e-10, callback=None) -> AscentResult:
    """Projected gradient ascent on ``J = |alpha_inf|^2 / 2`` at a fixed wavelength.

    Each iteration projects the ``J`` gradient on the Fourier basis, moves the
    boundary along its normal and backtracks until the Armijo condition holds
    and the new boundary is admissible.  Operators are rebuilt every step.

    Status is one of ``"max_steps"``, ``"converged"`` (small gradient),
    ``"step_floor"`` or ``"cell_constraint"``.
    """
    rule = rule or StepRule()
    _, res, grad = evaluate(boundary, material)
    J = 0.5 * abs(res.alpha_inf) ** 2
    h = project_to_basis(boundary, grad.j_gradient, n_modes)
    gnorm = float(np.sqrt(np.sum(boundary.weights * h * h)))
    traj = [AscentStep(0, J, gnorm, 0.0, boundary, res.alpha_inf)]
    if callback:
        callback(traj[-1])
    status = "max_steps"
    for it in range(1, steps + 1):
        if gnorm <= grad_tol:
            status = "converged"
            break
        slope = gnorm**2
        eta = rule.initial_move / float(np.max(np.abs(h)))
        accepted = None
        rejected_geometry = 0
        for _ in range(rule.max_halvings):
            if eta < rule.min_step:
                break
            try:
                trial = perturb(boundary, NormalPerturbation(h, eta))
                _, t_res, t_grad = evaluate(trial, material)
            except GeometryError:
                rejected_geometry += 1
                eta *= rule.shrink
                continue
            tJ = 0.5 * abs(t_res.alpha_inf) ** 2
            if tJ >= J + rule.armijo * eta * slope:
                accepted = (trial, t_res, t_grad, tJ)
                break
            eta *= rule.shrink
        if accepted is None:
            status = "cell_constraint" if rejected_geometry == rule.max_halvings else "step_floor"
            log.info("ascent stopped at iteration %d: %s", it, status)
            break
        boundary, res, grad, J = accepted
        h = project_to_basis(boundary, grad.j_gradient, n_modes)
        gnorm = float(np.sqrt(np.sum(boundary.weights * h * h)))
        traj.append(AscentStep(it, J, gnorm, eta, boundary, res.alpha_inf))
        if callback:
            callback(traj[-1])
    return AscentResult(traj, status)


def trajectory_rows(result: AscentResult, n_modes=DEFAULT_MODES):
    """Rows for the trajectory CSV: iteration, J, gradient norm, step and boundary coefficients."""
    rows = []
    for st in result.trajectory:
        coeffs = []
        for ks, cs in radial_boundary_coefficients(st.boundary, n_modes):
            for c in cs:
                coeffs += [c.real, c.imag]
        rows.append([st.iteration, st.J, st.grad_norm, st.step] + coeffs)
    return rows


def trajectory_header(boundary, n_modes=DEFAULT_MODES):
    cols = ["iteration", "J", "grad_norm", "step_size"]
    for ci, (ks, _) in enumerate(radial_boundary_coefficients(boundary, n_modes)):
        for k in ks:
            cols += [f"c{ci}_k{k}_re", f"c{ci}_k{k}_im"]
    return cols
