import math

import numpy as np
import pytest

from metaimpedance.geometry import (BoundaryCurve, GeometryError, NormalPerturbation, ParticleBoundary,
                                    fourier_derivative, fourier_resample, make_disk, make_multi,
                                    make_star, perturb, radial_boundary_coefficients)


def test_disk_geometry_exact():
    b = make_disk((0.1, 0.5), 0.2, 64)
    assert b.perimeter() == pytest.approx(2 * math.pi * 0.2, rel=1e-14)
    assert b.area() == pytest.approx(math.pi * 0.04, rel=1e-14)
    np.testing.assert_allclose(b.curvature, 5.0, rtol=1e-13)
    radial = (b.points - [0.1, 0.5]) / 0.2
    np.testing.assert_allclose(b.normal, radial, atol=1e-14)
    np.testing.assert_allclose(np.sum(b.normal * b.tangent, axis=1), 0.0, atol=1e-15)


def test_normal_integrates_to_zero(star):
    assert np.max(np.abs(star.integrate(star.normal))) < 1e-15


def test_divergence_theorem_gives_area(star):
    # int y2 nu2 dsigma = area
    assert star.integrate(star.points[:, 1] * star.normal[:, 1]) == pytest.approx(star.area(), rel=1e-13)


def test_star_curvature_from_samples_matches_analytic():
    b = make_star((0.0, 0.5), 0.2, 0.05, 5, 256)
    c = BoundaryCurve.from_samples(b.points)
    np.testing.assert_allclose(c.curvature, b.curvature, atol=1e-9)
    np.testing.assert_allclose(c.normal, b.normal, atol=1e-12)


def test_fourier_derivative_of_trig_polynomial():
    t = 2 * np.pi * np.arange(32) / 32
    f = np.sin(3 * t) + 0.5 * np.cos(7 * t)
    np.testing.assert_allclose(fourier_derivative(f, 1), 3 * np.cos(3 * t) - 3.5 * np.sin(7 * t), atol=1e-12)
    np.testing.assert_allclose(fourier_derivative(f, 2), -9 * np.sin(3 * t) - 24.5 * np.cos(7 * t), atol=1e-11)


def test_fourier_resample_is_band_limited_interpolation():
    t = 2 * np.pi * np.arange(16) / 16
    f = np.cos(2 * t) + np.sin(5 * t)
    tt = 2 * np.pi * np.arange(80) / 80
    np.testing.assert_allclose(fourier_resample(f, 80), np.cos(2 * tt) + np.sin(5 * tt), atol=1e-14)
    with pytest.raises(ValueError):
        fourier_resample(f, 8)


@pytest.mark.parametrize("kwargs, msg", [
    (dict(center=(0.0, 0.1), radius=0.2), "plate"),
    (dict(center=(0.4, 0.5), radius=0.2), "walls"),
    (dict(center=(0.0, 0.5), radius=-0.1), "positive"),
])
def test_disk_cell_constraints(kwargs, msg):
    with pytest.raises(GeometryError, match=msg):
        make_disk(n_nodes=32, **kwargs)


def test_odd_node_count_rejected():
    with pytest.raises(GeometryError):
        make_disk((0, 0.5), 0.2, 33)


def test_star_amplitude_bound():
    with pytest.raises(GeometryError):
        make_star((0, 0.5), 0.1, 0.1, 3, 64)
    assert make_star((0, 0.5), 0.1, 0.0, 3, 64).curves[0].descriptor["kind"] == "disk"


def test_multi_component_layout():
    b = make_multi([make_disk((-0.3, 0.5), 0.06, 32), make_disk((0.0, 0.25), 0.16, 64),
                    make_disk((0.3, 0.5), 0.06, 32)])
    assert b.n_components == 3 and len(b) == 128
    assert [s.stop - s.start for s in b.slices] == [32, 64, 32]
    assert b.area() == pytest.approx(math.pi * (2 * 0.06**2 + 0.16**2), rel=1e-13)


def test_overlapping_components_rejected():
    with pytest.raises(GeometryError, match="overlap"):
        make_multi([make_disk((0.0, 0.5), 0.2, 32), make_disk((0.1, 0.5), 0.2, 32)])


def test_self_intersection_detected():
    t = 2 * np.pi * np.arange(64) / 64
    figure_eight = np.column_stack([0.2 * np.sin(2 * t), 0.5 + 0.2 * np.sin(t)])
    c = BoundaryCurve.from_samples(figure_eight)
    with pytest.raises(GeometryError):
        ParticleBoundary([c]).validate()


def test_node_arrays_are_read_only(disk):
    with pytest.raises(ValueError):
        disk.points[0, 0] = 1.0


def test_perturb_moves_nodes_along_normal(disk):
    h = 1.0 + np.cos(2 * disk.curves[0].param)
    eps = 1e-4
    p = perturb(disk, NormalPerturbation(h, eps))
    np.testing.assert_allclose(p.points, disk.points + eps * h[:, None] * disk.normal, atol=1e-15)
    assert p.curves[0].descriptor["kind"] == "perturbed"
    # area changes by int h dsigma to first order
    m = perturb(disk, NormalPerturbation(h, -eps))
    dA = (p.area() - m.area()) / (2 * eps)
    assert dA == pytest.approx(disk.integrate(h), rel=1e-6)


def test_zero_perturbation_is_identity(disk):
    assert perturb(disk, NormalPerturbation(np.zeros(len(disk)), 1.0)) is disk


def test_perturb_rejects_cell_violation(disk):
    with pytest.raises(GeometryError):
        perturb(disk, NormalPerturbation(np.ones(len(disk)), 0.35))


def test_radial_coefficients_of_disk(disk):
    (ks, cs), = radial_boundary_coefficients(disk, 4)
    assert list(ks) == [-4, -3, -2, -1, 0, 1, 2, 3, 4]
    expected = np.zeros(9, dtype=complex)
    expected[4] = 0.5j
    expected[5] = 0.2
    np.testing.assert_allclose(cs, expected, atol=1e-15)
