import math

import numpy as np
import pytest

from pikfnn import (
    Deep,
    DomainError,
    PulsatingSphere,
    Shallow,
    Sediment,
    SyntheticSourceCloud,
    Unbounded,
    WaveContext,
    helmholtz_residual,
    kernel_unbounded,
    pulsating_sphere_magnitude,
    pulsating_sphere_pressure,
    random_cloud,
    spl,
    synthetic_field,
)


def test_surface_value():
    sph = PulsatingSphere(1.0, 1e-4, WaveContext(800.0))
    ctx = sph.context
    kr = ctx.wavenumber_k
    p = pulsating_sphere_pressure([1.0, 0, 0], sph)
    expected = 1j * kr * ctx.density_rho0 * ctx.sound_speed_c0 / (1j * kr - 1) * 1e-4
    assert p == pytest.approx(expected, rel=1e-15)
    assert abs(p) == pytest.approx(ctx.density_rho0 * ctx.sound_speed_c0 * 1e-4 * kr / math.sqrt(1 + kr * kr), rel=1e-14)


def test_plane_wave_asymptote():
    sph = PulsatingSphere(1.0, 1e-4, WaveContext(2000.0))
    ctx = sph.context
    assert ctx.wavenumber_k > 7
    p = pulsating_sphere_pressure([0, 40.0, 0], sph)
    assert abs(p) * 40.0 == pytest.approx(ctx.density_rho0 * ctx.sound_speed_c0 * 1e-4, rel=1e-2)


def test_example_probe_value():
    sph = PulsatingSphere(1.0, 1e-4, WaveContext(1000.0))
    p = pulsating_sphere_pressure([10.0, 0, 0], sph)
    assert abs(p) == pytest.approx(pulsating_sphere_magnitude(10.0, sph), rel=1e-14)
    assert abs(p) == pytest.approx(14.95, abs=0.01)
    assert spl(p) == pytest.approx(143.5, abs=0.01)


def test_inside_sphere_rejected():
    with pytest.raises(DomainError):
        pulsating_sphere_pressure([0.5, 0, 0], PulsatingSphere())


def test_radial_velocity_closure():
    sph = PulsatingSphere(1.0, 1e-4, WaveContext(1000.0))
    ctx = sph.context
    d = np.array([1.0, 2.0, -0.5]) / math.sqrt(5.25)
    h = 1e-5
    p0, p1, p2 = (pulsating_sphere_pressure(d * (1.0 + i * h), sph) for i in range(3))
    # Second-order one-sided difference, outward from the surface.
    dpdr = (-3 * p0 + 4 * p1 - p2) / (2 * h)
    v = dpdr / (1j * ctx.angular_frequency * ctx.density_rho0)
    assert abs(v - 1e-4) <= 1e-8 * 1e-4


def test_oracle_helmholtz():
    sph = PulsatingSphere(1.0, 1e-4, WaveContext(300.0))
    ev = lambda pts: pulsating_sphere_pressure(pts, sph)
    for x in ([3.0, 0, 0], [2.0, -4.0, 1.0], [0, 0, 15.0]):
        assert helmholtz_residual(ev, x, sph.context, 1e-3) <= 1e-3


def test_single_monopole_is_kernel_column():
    ctx = WaveContext(500.0)
    cloud = SyntheticSourceCloud([[0, 0, 0]], [1.0], Unbounded(), 0.3)
    pts = np.array([[3.0, 0, 0], [1, 2, 3], [-4, 0.5, 1]])
    assert np.array_equal(synthetic_field(cloud, pts, ctx), kernel_unbounded(pts, np.zeros(3), ctx))


def test_deep_cloud_vanishes_on_surface():
    ctx = WaveContext(500.0)
    cloud = random_cloud(Deep(20.0), seed=3)
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.uniform(-30, 30, 50), rng.uniform(-30, 30, 50), np.full(50, 20.0)])
    assert np.all(synthetic_field(cloud, pts, ctx) == 0)


def test_shallow_cloud_vanishes_on_surface():
    ctx = WaveContext(500.0)
    cloud = random_cloud(Shallow(10.0, 20.0, Sediment(2600, 1620)), seed=4)
    rng = np.random.default_rng(1)
    pts = np.column_stack([rng.uniform(-30, 30, 50), rng.uniform(-30, 30, 50), np.full(50, 10.0)])
    field = synthetic_field(cloud, pts, ctx)
    assert np.all(np.abs(field) <= 1e-13 * np.abs(cloud.strengths).sum() / 5.0)


def test_random_cloud_properties():
    a = random_cloud(Unbounded(), n_monopoles=7, envelope_radius=0.3, seed=11, center=(1.0, 0, 0))
    b = random_cloud(Unbounded(), n_monopoles=7, envelope_radius=0.3, seed=11, center=(1.0, 0, 0))
    assert np.array_equal(a.positions, b.positions) and np.array_equal(a.strengths, b.strengths)
    assert np.all(np.linalg.norm(a.positions - [1.0, 0, 0], axis=1) < 0.3)
    c = random_cloud(Unbounded(), n_monopoles=7, seed=12)
    assert not np.array_equal(a.strengths, c.strengths)


def test_cloud_validation():
    with pytest.raises(ValueError):
        SyntheticSourceCloud([[0.5, 0, 0]], [1.0], Unbounded(), 0.3)
    with pytest.raises(ValueError):
        SyntheticSourceCloud([[0, 0, 0]], [1.0, 2.0], Unbounded(), 0.3)
