import math

import numpy as np
import pytest

from jetext.fixtures import circle_fixture, disk_holder_jet, disk_identity_jet
from jetext.geometry import DISK_FORM, distance
from jetext.holo import (
    CirclePoint,
    DiskKernelParams,
    ZeroDenominatorError,
    check_derivative_growth,
    check_kernel_lower_bound,
    circle_sample,
    disk_extend,
    disk_extend_derivative,
    disk_form,
    disk_jet,
    disk_kernel_mass,
    radial_derivative_scan,
    read_angle_file,
    write_angle_file,
    zero_free_scan,
)
from jetext.measure import DoublingMeasure, build_measure


def test_circle_point():
    p = CirclePoint(2.5 * math.pi)
    assert p.angle == pytest.approx(0.5 * math.pi)
    assert abs(p.coordinate) == pytest.approx(1.0)


def test_disk_form_basics():
    assert disk_form(0j, 1.0 + 0j) == 1.0
    w = complex(math.cos(1.1), math.sin(1.1))
    assert disk_form(w, w) == pytest.approx(0.0, abs=1e-15)


def test_disk_form_equals_chordal_on_circle():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a, b = rng.uniform(0, 2 * math.pi, size=2)
        z = complex(math.cos(a), math.sin(a))
        w = complex(math.cos(b), math.sin(b))
        assert abs(disk_form(z, w)) == pytest.approx(abs(z - w), abs=1e-12)
        # the geometry metric agrees with the complex computation
        assert distance([z.real, z.imag], [w.real, w.imag], DISK_FORM) == pytest.approx(
            abs(disk_form(z, w)), abs=1e-12
        )


def test_kernel_mass_closed_forms():
    sample = circle_sample([0.7])
    mu = DoublingMeasure(sample, [1.0], None, 1)
    w = sample.atoms[0, 0] + 1j * sample.atoms[0, 1]
    z = 0.3 - 0.2j
    want = (1.0 - z * np.conj(w)) ** -1.3
    assert disk_kernel_mass(mu, 1.3, z) == pytest.approx(want, rel=1e-14)

    fx = circle_fixture(6)
    assert disk_kernel_mass(fx.mu, 0.5, 0j) == pytest.approx(1.0, abs=1e-12)

    anti = circle_sample([0.0, math.pi])
    mu2 = DoublingMeasure(anti, [0.5, 0.5], None, 1)
    for r in (0.2, 0.6, 0.9):
        assert disk_kernel_mass(mu2, 1.0, r + 0j) == pytest.approx(1.0 / (1 - r * r), rel=1e-13)


def test_kernel_mass_singular_at_atom():
    fx = circle_fixture(5)
    atom = fx.mu.support_points[0]
    z = complex(atom[0], atom[1])
    with pytest.raises(ZeroDenominatorError):
        disk_kernel_mass(fx.mu, 0.5, z)


def test_extend_constant_jet():
    fx = circle_fixture(6)
    one = disk_jet(fx.sample, 1.0, {0: lambda z: 1.0, 1: lambda z: 0.0})
    params = DiskKernelParams(q=0.5, alpha=1.0)
    for z in (0j, 0.5 + 0.1j, -0.2 + 0.7j):
        assert disk_extend(one, fx.mu, params, z) == pytest.approx(1.0, abs=1e-12)


def test_extend_reproduces_identity():
    fx = circle_fixture(7)
    jet = disk_identity_jet(fx.sample)
    params = DiskKernelParams(q=0.5, alpha=1.0)
    for z in (0.3 + 0.2j, -0.6j, 0.7 + 0j, -0.4 + 0.4j):
        assert disk_extend(jet, fx.mu, params, z) == pytest.approx(z, abs=1e-10)


def test_cauchy_riemann_residual_quarters():
    fx = circle_fixture(8)
    jet = disk_holder_jet(fx.sample, alpha=1.6)
    params = DiskKernelParams(q=2.7, alpha=1.6)

    def cr(z, h):
        f = lambda w: disk_extend(jet, fx.mu, params, w)
        dx = (f(z + h) - f(z - h)) / (2 * h)
        dy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
        return abs(0.5 * (dx + 1j * dy))

    rng = np.random.default_rng(2)
    for _ in range(6):
        z = (0.15 + 0.2 * rng.random()) * np.exp(1j * (math.pi / 2 + math.pi * rng.random()))
        r1, r2 = cr(z, 1e-3), cr(z, 5e-4)
        assert r1 <= 1e-6
        assert r1 / r2 == pytest.approx(4.0, rel=0.05)


def test_series_derivative_matches_finite_differences():
    fx = circle_fixture(7)
    jet = disk_holder_jet(fx.sample, alpha=1.6)
    params = DiskKernelParams(q=2.7, alpha=1.6)
    z = -0.2 + 0.3j
    got = disk_extend_derivative(jet, fx.mu, params, z, 1)
    h = 1e-6
    fd = (disk_extend(jet, fx.mu, params, z + h) - disk_extend(jet, fx.mu, params, z - h)) / (2 * h)
    assert got == pytest.approx(fd, rel=1e-7)


def test_zero_free_scan_cached_and_positive():
    fx = circle_fixture(6)
    a = zero_free_scan(fx.mu, 0.5, 0.9)
    b = zero_free_scan(fx.mu, 0.5, 0.9)
    assert a is b  # cache hit
    assert a.zero_free and a.min_scaled_mass > 0


def test_kernel_lower_bound_full_circle():
    fx = circle_fixture(7)
    rep = check_kernel_lower_bound(fx.mu, q=0.5, samples=10, rays=32)
    assert rep.passed
    assert rep.sup_ratio > 0.0
    assert len(rep.refinement) >= 2


def test_kernel_lower_bound_single_atom_constant_ratio():
    sample = circle_sample([1.2])
    mu = DoublingMeasure(sample, [1.0], None, 1)
    rep = check_kernel_lower_bound(mu, q=0.8, samples=6, rays=16)
    # |h| = d^-q exactly and mu(B_z) = 1, so the ratio is identically 1
    assert rep.sup_ratio == pytest.approx(1.0, abs=1e-9)


def test_kernel_lower_bound_arc_reports_without_asserting():
    angles = np.linspace(0.3, 1.2, 24)
    sample = circle_sample(angles)
    mu = build_measure(sample, 8)
    rep = check_kernel_lower_bound(mu, q=2.5, samples=6, rays=24)
    assert rep.sup_ratio >= 0.0  # a failing bound is still a valid report
    assert rep.witness.startswith("z=")


def test_derivative_growth_polynomial_and_constant_jets():
    fx = circle_fixture(6)
    params = DiskKernelParams(q=3.6, alpha=1.6)
    jet = disk_jet(fx.sample, 1.6, {0: lambda z: z, 1: lambda z: 1.0})
    rep = check_derivative_growth(jet, fx.mu, params, m=2, samples=4, ladder=(2, 6))
    assert rep.sup_ratio <= 1e-9  # second derivative of an exactly reproduced linear map
    one = disk_jet(fx.sample, 1.6, {0: lambda z: 1.0, 1: lambda z: 0.0})
    rep1 = check_derivative_growth(one, fx.mu, params, m=2, samples=4, ladder=(2, 6))
    assert rep1.sup_ratio <= 1e-9


def test_derivative_growth_holder_profile_stable():
    fx = circle_fixture(7)
    jet = disk_holder_jet(fx.sample, alpha=1.6)
    rep = check_derivative_growth(jet, fx.mu, DiskKernelParams(q=3.6, alpha=1.6), m=3, samples=6, ladder=(2, 8))
    assert rep.passed
    assert np.isfinite(rep.sup_ratio)


def test_derivative_growth_requires_half_integer_free_alpha():
    fx = circle_fixture(5)
    jet = disk_holder_jet(fx.sample, alpha=1.5)
    with pytest.raises(ValueError, match="2\\*alpha"):
        check_derivative_growth(jet, fx.mu, DiskKernelParams(q=3.5, alpha=1.5), m=3, samples=2)


def test_radial_derivative_scan_finite():
    fx = circle_fixture(6)
    jet = disk_holder_jet(fx.sample, alpha=1.6)
    scan = radial_derivative_scan(jet, fx.mu, DiskKernelParams(q=3.6, alpha=1.6), beta=1.8, rays=4, steps=24)
    assert scan["finite"]
    assert scan["ell"] == 2
    assert len(scan["per_ray"]) == 4


def test_angle_file_roundtrip(tmp_path):
    path = tmp_path / "angles.txt"
    angles = np.array([0.0, 0.7, 3.1, 6.2])
    write_angle_file(path, angles)
    assert np.array_equal(read_angle_file(path), angles)
    bad = tmp_path / "bad.txt"
    bad.write_text("0.4\nnot-a-number\n")
    with pytest.raises(ValueError, match="malformed angle"):
        read_angle_file(bad)
