import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import ellipe

from phasetrace import (
    DegenerateBoundary, NotInTube, TubeTooWide, boundary_integral,
    boundary_points, curvature_at, disc, ellipse, inward_normal,
    nearest_boundary_point, scale_domain, signed_distance, star_domain,
    tube_integral, tubular_radius,
)

ELL = ellipse(1.3, 0.8)


# ---------------------------------------------------------------- distances

@given(st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=60, deadline=None)
def test_disc_signed_distance_closed_form(x, y):
    d = disc()
    sd = signed_distance(d, np.array([[x, y]]))[0]
    assert sd == pytest.approx(1.0 - np.hypot(x, y), abs=1e-10)


def test_shifted_scaled_disc_distance():
    d = disc(radius=2.5, center=(1.0, -0.5))
    pts = np.array([[1.0, -0.5], [4.0, -0.5], [1.0, 3.0]])
    expect = 2.5 - np.hypot(pts[:, 0] - 1.0, pts[:, 1] + 0.5)
    assert np.allclose(signed_distance(d, pts), expect, atol=1e-10)


def test_nearest_boundary_point_roundtrip():
    tau = tubular_radius(ELL)
    rng = np.random.default_rng(3)
    for _ in range(25):
        s0 = rng.uniform(0, 2 * np.pi)
        lam0 = rng.uniform(-0.9 * tau, 0.9 * tau)
        u0 = boundary_points(ELL, s0)[0]
        n0 = inward_normal(ELL, s0)[0]
        z = u0 + lam0 * n0
        u, s, lam = nearest_boundary_point(ELL, z)
        assert lam == pytest.approx(lam0, abs=1e-8)
        assert np.allclose(u, u0, atol=1e-8)


def test_point_outside_tube_raises():
    with pytest.raises(NotInTube):
        nearest_boundary_point(disc(), np.array([5.0, 5.0]))


# ----------------------------------------------------------------- geometry

def test_ellipse_tubular_radius_focal_value():
    # smallest radius of curvature of an ellipse sits at the long-axis ends:
    # rho_min = b^2 / a = 0.64 / 1.3
    assert tubular_radius(ELL) == pytest.approx(0.8 ** 2 / 1.3, abs=1e-9)


def test_disc_tubular_radius_is_radius():
    assert tubular_radius(disc(radius=1.7)) == pytest.approx(1.7, rel=1e-9)


@given(st.floats(0.3, 3.0))
@settings(max_examples=15, deadline=None)
def test_tubular_radius_scales_linearly(s):
    scaled = scale_domain(ELL, s)
    assert tubular_radius(scaled) == pytest.approx(
        s * tubular_radius(ELL), rel=1e-9)


def test_star_domain_has_smaller_tube_than_disc():
    star = star_domain(0.2, 5)
    assert 0 < tubular_radius(star) < tubular_radius(disc())


def test_ellipse_curvature_extremes():
    # kappa = a/b^2 at the long-axis vertex, b/a^2 at the short-axis vertex
    assert curvature_at(ELL, 0.0)[0] == pytest.approx(1.3 / 0.64, rel=1e-10)
    assert curvature_at(ELL, np.pi / 2)[0] == pytest.approx(0.8 / 1.69, rel=1e-10)


def test_inward_normal_points_inward():
    s = np.linspace(0, 2 * np.pi, 32, endpoint=False)
    pts = boundary_points(ELL, s)
    nrm = inward_normal(ELL, s)
    probe = pts + 1e-4 * nrm
    assert np.all(signed_distance(ELL, probe) > 0)


# ---------------------------------------------------------------- integrals

def test_ellipse_perimeter_against_elliptic_integral():
    per = boundary_integral(ELL, lambda p: np.ones(len(p)))
    e2 = 1.0 - (0.8 / 1.3) ** 2
    assert per == pytest.approx(4 * 1.3 * ellipe(e2), rel=1e-12)


def test_closed_curve_normal_integrates_to_zero():
    star = star_domain(0.15, 4)
    n = 2048
    s = 2 * np.pi * np.arange(n) / n
    total = boundary_integral(star, lambda p: inward_normal(star, s), n=n)
    assert np.max(np.abs(total)) < 1e-10


def test_tube_area_of_annulus():
    area = tube_integral(disc(), lambda p: np.ones(len(p)), 0.3)
    assert area == pytest.approx(np.pi * (1.3 ** 2 - 0.7 ** 2), rel=1e-12)


def test_tube_weighted_by_signed_distance():
    # disc, half-width 1/2: integral of the normal coordinate over the tube
    # is 2*pi * int_{-1/2}^{1/2} lam*(1 - lam) dlam = -pi/6
    d = disc()
    val = tube_integral(d, lambda p: signed_distance(d, p), 0.5)
    assert val == pytest.approx(-np.pi / 6, abs=1e-10)


def test_tube_wider_than_reach_raises():
    with pytest.raises(TubeTooWide):
        tube_integral(disc(), lambda p: np.ones(len(p)), 1.2)


def test_star_eps_outside_unit_interval_rejected():
    with pytest.raises(ValueError):
        star_domain(1.5, 3)  # r(theta) would cross zero


def test_vanishing_tangent_raises():
    from phasetrace import Domain

    def gamma(s):
        s = np.atleast_1d(s)
        return np.stack([np.cos(s) ** 3, np.sin(s) ** 3], axis=-1)

    def dgamma(s):
        s = np.atleast_1d(s)
        return np.stack([-3 * np.cos(s) ** 2 * np.sin(s),
                         3 * np.sin(s) ** 2 * np.cos(s)], axis=-1)

    def ddgamma(s):
        s = np.atleast_1d(s)
        return np.stack([
            6 * np.cos(s) * np.sin(s) ** 2 - 3 * np.cos(s) ** 3,
            6 * np.sin(s) * np.cos(s) ** 2 - 3 * np.sin(s) ** 3], axis=-1)

    astroid = Domain(gamma, lambda x, y: np.abs(x) ** (2 / 3) + np.abs(y) ** (2 / 3) <= 1,
                     1.0, dgamma, ddgamma, name="astroid")
    with pytest.raises(DegenerateBoundary):
        inward_normal(astroid, 0.0)  # cusp: the tangent vanishes
