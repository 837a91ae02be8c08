import math

import numpy as np
from hypothesis import assume, given
from hypothesis import strategies as st

from metaimpedance import green
from metaimpedance.geometry import GeometryError, make_disk, make_star
from metaimpedance.impedance import DrudeParameters, drude_gold, reflection_coefficient

coord = st.floats(-0.5, 0.5)
height = st.floats(0.02, 3.0)


@given(coord, st.floats(-3.0, 3.0), st.integers(-3, 3))
def test_green_periodic_and_even(x1, x2, m):
    assume(abs(x2) > 1e-3 or abs(x1) > 1e-3)
    g = green.g_periodic(x1, x2)
    assert math.isclose(green.g_periodic(x1 + m, x2), g, rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(green.g_periodic(-x1, -x2), g, rel_tol=1e-13, abs_tol=1e-13)


@given(coord, coord, height)
def test_halfspace_vanishes_on_plate(t1, s1, s2):
    assert green.g_halfspace(np.array([t1, 0.0]), np.array([s1, s2])) == 0.0


@given(coord, height, coord, height)
def test_halfspace_symmetric(t1, t2, s1, s2):
    assume(math.hypot(t1 - s1, t2 - s2) > 1e-3)
    a = green.g_halfspace(np.array([t1, t2]), np.array([s1, s2]))
    b = green.g_halfspace(np.array([s1, s2]), np.array([t1, t2]))
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-14)


@given(st.floats(-0.3, 0.3), st.floats(0.1, 1.5), st.floats(0.02, 0.3), st.sampled_from([32, 64, 96]))
def test_disk_invariants(c1, c2, r, n):
    try:
        b = make_disk((c1, c2), r, n)
    except GeometryError:
        assume(False)
    assert np.max(np.abs(b.integrate(b.normal))) < 1e-13
    assert math.isclose(b.perimeter(), 2 * math.pi * r, rel_tol=1e-12)
    assert math.isclose(b.integrate(b.points[:, 1] * b.normal[:, 1]), math.pi * r * r, rel_tol=1e-12)
    assert b.points[:, 1].min() > 0 and np.ptp(b.points[:, 0]) < 1


@given(st.floats(0.05, 0.25), st.floats(0.0, 0.9), st.integers(2, 6))
def test_star_invariants(r, frac, lobes):
    b = make_star((0.0, 0.6), r, frac * r / (1 + lobes**2) ** 0.5, lobes, 128)
    assert np.max(np.abs(b.integrate(b.normal))) < 1e-12
    # curvature integrates to 2 pi for a simple closed curve
    assert math.isclose(b.integrate(b.curvature), 2 * math.pi, rel_tol=1e-8)
    np.testing.assert_allclose(np.hypot(*b.normal.T), 1.0, atol=1e-14)


@given(st.floats(-5, 5), st.floats(-5, -1e-6), st.floats(0.1, 50), st.floats(1e-3, 0.5),
       st.floats(-1.4, 1.4))
def test_lossy_impedance_reflects_less_than_unity(zr, zi, k, delta, theta):
    d = np.array([math.sin(theta), -math.cos(theta)])
    assert abs(reflection_coefficient(complex(zr, zi), k, d, delta)) < 1.0


@given(st.floats(300, 1500), st.floats(1e-3, 0.5), st.floats(1.0, 12.0))
def test_lossy_drude_contrast_sign(wl, gamma, eps_inf):
    m = drude_gold(wl * 1e-9, DrudeParameters(hbar_gamma=gamma, eps_inf=eps_inf))
    assume(m.mu_c != m.mu_m)
    assert m.lambda_mu.imag < 0 < m.resolvent_lambda.imag
