import logging
import math

import numpy as np
import pytest

from metaimpedance.geometry import make_disk
from metaimpedance.impedance import (DrudeParameters, ModalData, NearSingularError, alpha_inf_direct,
                                     alpha_inf_spectral, corrector_field, drude_gold,
                                     reflection_coefficient, solve_density)
from metaimpedance.operators import PeriodicOperators, eigendecompose
from metaimpedance.sweep import SweepEngine

RESONANT = DrudeParameters(eps_inf=9.84)


def test_drude_signs(sweep_nm):
    for wl in sweep_nm[::20]:
        m = drude_gold(wl * 1e-9)
        assert m.mu_c.real < 0 < m.mu_c.imag
        assert m.lambda_mu.imag < 0
        assert m.resolvent_lambda == -m.lambda_mu


def test_drude_reference_value():
    # eps = 1 - 9.02^2 / (w^2 + i 0.027 w) at w = hc / 600 nm
    w = 1239.841984 / 600.0
    expected = 1.0 - 9.02**2 / (w * w + 1j * 0.027 * w)
    m = drude_gold(600e-9)
    assert m.mu_c / m.mu_m == pytest.approx(expected, rel=1e-14)


def test_lossless_limit_gives_real_lambda():
    m = drude_gold(600e-9, DrudeParameters(hbar_gamma=0.0))
    assert m.lambda_mu.imag == 0.0


def test_drude_range_enforced():
    with pytest.raises(ValueError):
        drude_gold(200e-9)
    with pytest.raises(ValueError):
        drude_gold(1600e-9)


@pytest.mark.parametrize("which", ["disk", "star"])
def test_spectral_matches_direct(which, request, sweep_nm):
    b = request.getfixturevalue(which)
    ops = request.getfixturevalue(which + "_ops")
    spec = eigendecompose(ops)
    modal = ModalData.from_spectrum(spec, b)
    for params in (DrudeParameters(), RESONANT):
        for wl in sweep_nm[::12]:
            lam = drude_gold(wl * 1e-9, params).resolvent_lambda
            a = alpha_inf_direct(ops, lam).alpha_inf
            s = alpha_inf_spectral(spec, b, lam, modal=modal).alpha_inf
            assert abs(s - a) <= 1e-8 * abs(a)


def test_absorbing_particle_has_positive_im_alpha(disk_ops, sweep_nm):
    for params in (DrudeParameters(), RESONANT):
        for wl in sweep_nm[::10]:
            a = alpha_inf_direct(disk_ops, drude_gold(wl * 1e-9, params).resolvent_lambda).alpha_inf
            assert a.imag > 0


def test_neumann_limit(disk_ops, disk):
    for lam in (1e3, -1e3, 1e5):
        a = alpha_inf_direct(disk_ops, lam).alpha_inf
        assert abs(a + disk.area() / lam) < 10 * disk.area() / lam**2


def test_density_is_zero_mean(disk_ops, gold_600):
    phi = solve_density(disk_ops, gold_600.resolvent_lambda)
    assert abs(np.sum(disk_ops.weights * phi)) < 1e-14


def test_near_singular_lambda_raises(disk_ops, disk_spec):
    with pytest.raises(NearSingularError):
        solve_density(disk_ops, disk_spec.eigenvalues[0])


def test_eigen_identity(disk_modal, star_ops, star):
    assert np.max(disk_modal.identity_defect(10)) < 1e-6
    star_modal = ModalData.from_spectrum(eigendecompose(star_ops), star)
    c, ibp = star_modal.c_y[:10], star_modal.c_y_ibp[:10]
    assert np.all(np.abs(c) > 1e-10 * np.max(np.abs(star_modal.c_y)))
    assert np.max(np.abs(c - ibp) / np.abs(c)) < 1e-6


def test_dominant_mode_reported(disk_spec, disk, gold_600):
    r = alpha_inf_spectral(disk_spec, disk, gold_600.resolvent_lambda)
    j, lam_j = r.dominant_mode()
    mags = [abs(t) for _, t in r.mode_contributions]
    assert mags[j] == max(mags) and lam_j == disk_spec.eigenvalues[j]


def test_direct_path_has_no_modes(disk_ops):
    j, lam_j = alpha_inf_direct(disk_ops, 0.3).dominant_mode()
    assert j == -1 and math.isnan(lam_j)


def test_single_mode_dominates_near_resonance(disk):
    eng = SweepEngine(disk, RESONANT)
    wl = np.linspace(300, 1500, 1201)
    peak = wl[int(np.argmax([eng.abs_alpha(x) for x in wl]))]
    r = eng.spectral(peak)
    mags = np.array([abs(t) for _, t in r.mode_contributions])
    assert mags.max() >= 0.9 * abs(r.alpha_inf)


def test_peak_sits_near_the_dominant_resonance(disk):
    # |alpha| peaks where Re(lam) crosses the dominant eigenvalue
    eng = SweepEngine(disk, RESONANT)
    wl = np.linspace(300, 1500, 1201)
    vals = np.array([eng.abs_alpha(x) for x in wl])
    i = int(np.argmax(vals))
    j, lam_j = eng.spectral(wl[i]).dominant_mode()
    gaps = np.array([abs(eng.material(x).resolvent_lambda.real - lam_j) for x in wl])
    assert abs(int(np.argmin(gaps)) - i) <= 1


def test_corrector_vanishes_on_plate_and_is_periodic(disk_ops, gold_600):
    lam = gold_600.resolvent_lambda
    plate = np.column_stack([np.linspace(-0.5, 0.5, 11), np.zeros(11)])
    assert np.max(np.abs(corrector_field(disk_ops, lam, plate))) == 0.0
    pts = np.array([[0.45, 0.9], [-0.1, 1.4]])
    np.testing.assert_allclose(corrector_field(disk_ops, lam, pts + [1, 0]),
                               corrector_field(disk_ops, lam, pts), atol=1e-13)


def test_corrector_decays_to_alpha_inf(disk_ops, gold_600):
    lam = gold_600.resolvent_lambda
    a = alpha_inf_direct(disk_ops, lam).alpha_inf
    h = np.array([2.0, 3.0, 4.0])
    d = np.abs(corrector_field(disk_ops, lam, np.column_stack([np.full(3, 0.2), h])) - a)
    rate = -np.polyfit(h, np.log(d), 1)[0]
    assert rate >= 2 * math.pi * 0.9
    assert abs(corrector_field(disk_ops, lam, [[0.0, 8.0]])[0] - a) < 1e-6 * abs(a)


def test_corrector_rejects_points_below_plate(disk_ops, gold_600):
    with pytest.raises(ValueError):
        corrector_field(disk_ops, gold_600.resolvent_lambda, [[0.0, -0.1]])


def test_corrector_warns_near_boundary(disk_ops, disk, gold_600, caplog):
    x = disk.points[:1] + 1e-3 * disk.normal[:1]
    with caplog.at_level(logging.WARNING, logger="metaimpedance.impedance"):
        corrector_field(disk_ops, gold_600.resolvent_lambda, x)
    assert "upsample" in caplog.text


def test_reflection_limits():
    d = np.array([0.0, -1.0])
    assert reflection_coefficient(0.0, 5.0, d, 0.05) == -1.0
    z = 0.3 - 0.2j
    r_small = reflection_coefficient(z, 5.0, d, 1e-9)
    assert abs(r_small + 1.0) < 1e-8
    assert abs(reflection_coefficient(z, 5.0, d, 0.05)) < 1.0
    assert abs(reflection_coefficient(0.3 + 0.2j, 5.0, d, 0.05)) > 1.0
    assert abs(reflection_coefficient(0.3, 5.0, d, 0.05)) == pytest.approx(1.0, abs=1e-15)


def test_reflection_input_errors():
    with pytest.raises(ValueError):
        reflection_coefficient(0.1, 1.0, [0.0, -1.0], 0.0)
    with pytest.raises(ValueError):
        reflection_coefficient(0.1, 1.0, [0.0, 1.0], 0.05)
    with pytest.raises(ValueError):
        reflection_coefficient(0.1, 1.0, [0.0, -0.5], 0.05)
    with pytest.raises(ZeroDivisionError):
        reflection_coefficient(1j, 1.0, [0.0, -1.0], 1.0)


def test_larger_disk_couples_more_strongly():
    vals = []
    for r in (0.1, 0.2, 0.3):
        ops = PeriodicOperators.assemble(make_disk((0.0, 0.5), r, 96))
        vals.append(abs(alpha_inf_direct(ops, drude_gold(800e-9).resolvent_lambda).alpha_inf))
    assert vals[0] < vals[1] < vals[2]
