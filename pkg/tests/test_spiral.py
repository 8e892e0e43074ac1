import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from coverembed import make_spiral, product_spiral_map
from coverembed.errors import SpiralError
from coverembed.spiral import SpiralCurve, spiral_point, spiral_tangent
from coverembed.verify import (
    jacobian_fd,
    spiral_annulus_residual,
    spiral_injectivity_residual,
    spiral_unit_speed_residual,
)


@pytest.fixture(scope="module")
def curve():
    return make_spiral()


def test_midpoint_start(curve):
    assert np.allclose(spiral_point(curve, 0.0), [1.5, 0.0], atol=1e-15)


def test_speed_budget():
    with pytest.raises(SpiralError, match="speed budget violated"):
        make_spiral(1, 2, 4.1)


def test_bad_radii():
    with pytest.raises(SpiralError):
        SpiralCurve(2, 1)


def test_theta_against_quadrature(curve):
    ref, _ = quad(curve.dtheta, 0.0, 10.0, epsabs=1e-13, epsrel=1e-13, limit=200)
    assert abs(curve.theta(10.0) - ref) < 1e-10


def test_limits(curve):
    assert np.linalg.norm(spiral_point(curve, 50.0)) - 1 < 1e-8
    r = np.linalg.norm(spiral_point(curve, -50.0))
    assert 2 - 1e-8 < r <= 2


def test_tangent_at_origin(curve):
    t = spiral_tangent(curve, 0.0)
    assert abs(np.linalg.norm(t) - 1) < 1e-10
    assert t[0] == pytest.approx(-0.25, abs=1e-15)
    assert t[1] == pytest.approx(curve.dtheta(0.0) * 1.5, rel=1e-14)


def test_tangent_finite_difference(curve):
    h = 1e-6
    fd = (spiral_point(curve, 3.7 + h) - spiral_point(curve, 3.7 - h)) / (2 * h)
    assert np.max(np.abs(fd - spiral_tangent(curve, 3.7))) < 1e-8


def test_table_extends_on_demand():
    c = make_spiral()
    lo, hi = c.table_range
    s = hi + 300.0
    assert np.isfinite(c.theta(s))
    assert c.table_range[1] >= s


def test_radius_gap_survives_saturation(curve):
    # rho itself rounds to r_in here; the gap must still be positive
    assert curve.rho(80.0) == curve.rho(90.0)
    assert curve.radius_gap(80.0, 90.0) > 0


def test_unit_speed_contract(curve):
    assert spiral_unit_speed_residual(curve) < 1e-8


def test_annulus_contract(curve):
    assert spiral_annulus_residual(curve) < 1e-12


def test_injectivity_contract(curve):
    violation, detail = spiral_injectivity_residual(curve)
    assert violation < 0
    assert detail["min_far_distance"] > 0.09 * curve.r_in
    assert detail["min_near_radius_drop"] > 0


def test_product_reduces_to_curve(curve):
    psi = product_spiral_map(curve, 1.0, 1)
    s = np.linspace(-5, 5, 11)
    assert np.array_equal(psi(s[:, None]), curve.point(s))


def test_product_origin(curve):
    psi = product_spiral_map(curve, 0.25, 2)
    assert psi.D == 4
    assert np.allclose(psi([0.0, 0.0]), [1.5, 0, 1.5, 0], atol=1e-15)


def test_product_pullback_point(curve):
    psi = product_spiral_map(curve, 0.25, 2)
    x = np.array([[0.3, -1.2]])
    J = psi.jacobian(x)[0]
    assert np.max(np.abs(J.T @ J - 0.25 * np.eye(2))) < 1e-8
    Jfd = jacobian_fd(psi, x)[0]
    assert np.max(np.abs(Jfd.T @ Jfd - 0.25 * np.eye(2))) < 1e-8


def test_product_pullback_random(curve):
    psi = product_spiral_map(curve, 0.7, 3)
    X = np.random.default_rng(0).uniform(-50, 50, (1000, 3))
    J = psi.jacobian(X)
    G = np.einsum("mki,mkj->mij", J, J)
    assert np.max(np.linalg.norm(G - 0.7 * np.eye(3), axis=(1, 2))) < 1e-8
    assert np.max(np.linalg.norm(psi(X), axis=-1)) <= psi.radius_bound


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.1, 2.0), st.floats(0.1, 1.0))
def test_contract_over_parameters(r_in, width, budget):
    k = budget * 3.99 / width
    c = make_spiral(r_in, r_in + width, k)
    s = np.linspace(-40, 40, 801)
    speed = np.linalg.norm(c.tangent(s), axis=-1)
    assert np.max(np.abs(speed - 1)) < 1e-8
    r = np.linalg.norm(c.point(s), axis=-1)
    assert np.all(r >= r_in - 1e-12) and np.all(r <= r_in + width + 1e-12)
    assert np.all(np.diff(c.theta(s)) > 0)
