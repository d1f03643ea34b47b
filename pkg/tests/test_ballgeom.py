import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quermass.ballgeom import (
    HALF_PI,
    MonotoneTable,
    ball_profile,
    ball_table,
    eta,
    eta1_closed,
    eta1_closed_derivative,
    eta_ode_integrate,
    eta_ode_rhs,
    eta_sqrt,
    invert_quermass,
    lower_curvature_integral,
    monotone_table,
    quermass_recursion,
    s_bound,
    sphere_area,
    xi,
    xi_inv,
)
from quermass.utils import ComputationError, DomainError


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2 * math.pi)
    assert sphere_area(2) == pytest.approx(4 * math.pi)
    assert sphere_area(3) == pytest.approx(2 * math.pi**2)


def test_ball_closed_form(quarter):
    profile = ball_profile(2, quarter)
    assert profile.A(1) == pytest.approx(math.pi**2 + 2 * math.pi, abs=1e-10)
    assert profile.vol == pytest.approx(math.pi**2 / 2 - math.pi, abs=1e-12)
    assert profile.area == pytest.approx(4 * math.pi * 0.5)
    np.testing.assert_allclose(profile.sigma, [1.0, 2.0, 1.0])


def test_ball_profile_layout():
    profile = ball_profile(4, 0.7)
    assert profile.quermass.shape == (6,)
    assert profile.A(-1) == profile.vol
    assert profile.A(0) == profile.area
    with pytest.raises(DomainError):
        profile.A(5)


def test_quermass_recursion_matches_profile():
    profile = ball_profile(5, 1.1)
    np.testing.assert_allclose(quermass_recursion(5, profile.sigma_int, profile.vol), profile.quermass, rtol=1e-15)


@pytest.mark.parametrize('n', range(2, 7))
def test_quermass_increasing(n):
    _, quermass = ball_table(n, np.linspace(0.01, 1.4, 200))
    assert np.all(np.diff(quermass[: n + 1], axis=1) > 0)


@pytest.mark.parametrize('n', [2, 3, 5])
def test_hemisphere_values(n):
    assert s_bound(n, 0) == pytest.approx(sphere_area(n))
    half_sin_power = math.sqrt(math.pi) * math.gamma((n + 1) / 2) / (2 * math.gamma(n / 2 + 1))
    assert s_bound(n, -1) == pytest.approx(sphere_area(n) * half_sin_power, rel=1e-10)


def test_domain_errors():
    with pytest.raises(DomainError):
        ball_profile(1, 0.5)
    with pytest.raises(DomainError):
        ball_profile(3, 0.0)
    with pytest.raises(DomainError):
        ball_profile(3, 1.6)
    with pytest.raises(DomainError):
        ball_table(3, [0.5, 2.0])
    with pytest.raises(DomainError):
        s_bound(3, 3)


@given(st.integers(2, 6), st.floats(0.05, 1.3), st.data())
def test_inversion_round_trip(n, rho, data):
    k = data.draw(st.integers(-1, n - 1))
    value = ball_profile(n, rho).A(k)
    assert invert_quermass(n, k, value) == pytest.approx(rho, abs=1e-8)


def test_inversion_vectorized():
    rho = np.array([0.2, 0.7, 1.4])
    values = ball_table(3, rho)[1][2]
    out = invert_quermass(3, 1, values)
    assert isinstance(out, np.ndarray)
    np.testing.assert_allclose(out, rho, atol=1e-9)
    assert isinstance(invert_quermass(3, 1, float(values[0])), float)


def test_inversion_endpoint():
    assert invert_quermass(3, 0, s_bound(3, 0)) == HALF_PI


@pytest.mark.parametrize('s', [0.0, -1.0, 1.01 * s_bound(3, 0), float('nan')])
def test_inversion_out_of_range(s):
    with pytest.raises(DomainError):
        invert_quermass(3, 0, s)


def test_monotone_table():
    table = monotone_table(3, 1)
    assert table is monotone_table(3, 1)
    assert table.values[-1] == s_bound(3, 1)
    s = 0.4 * s_bound(3, 1)
    lo, hi = table.bracket(s)
    assert table(lo) <= s <= table(hi)
    cubic = MonotoneTable.build(2, 0, order=3)
    assert float(cubic(0.7)) == pytest.approx(ball_profile(2, 0.7).A(0), rel=1e-5)


@pytest.mark.parametrize('n', range(8, 13))
def test_top_order_table_in_high_dimension(n):
    table = monotone_table(n, n - 1)
    assert np.all(np.diff(table.values) >= 0)
    assert table.values[-1] == s_bound(n, n - 1)
    assert invert_quermass(n, n - 1, ball_profile(n, 1.2).A(n - 1)) == pytest.approx(1.2, rel=1e-8)
    s = 0.5 * s_bound(n, n - 3)
    assert xi_inv(n, n - 1, n - 3, xi(n, n - 1, n - 3, s)) == pytest.approx(s, rel=1e-8)


def test_monotone_table_rejects_decreasing_values():
    rho = np.linspace(0, HALF_PI, 5)
    with pytest.raises(ComputationError):
        MonotoneTable(n=2, k=0, rho=rho, values=rho[::-1].copy())
    with pytest.raises(DomainError):
        MonotoneTable(n=2, k=0, rho=rho, values=rho, order=2)


@given(st.integers(2, 6), st.floats(0.05, 0.95), st.data())
def test_xi_inverse_pair(n, fraction, data):
    k = data.draw(st.integers(0, n - 1))
    l = data.draw(st.integers(-1, k - 1))
    s = fraction * s_bound(n, l)
    assert xi_inv(n, k, l, xi(n, k, l, s)) == pytest.approx(s, rel=1e-8)


def test_xi_order_errors():
    with pytest.raises(DomainError):
        xi(3, 1, 1, 1.0)
    with pytest.raises(DomainError):
        xi_inv(3, 3, 1, 1.0)


@pytest.mark.parametrize('n', range(2, 7))
def test_eta1_closed_form(n):
    s = np.linspace(0.05, 0.95, 100) * s_bound(n, 0)
    np.testing.assert_allclose(eta(n, 1, s), eta1_closed(n, s), rtol=1e-8)


def test_eta1_closed_derivative():
    s, h = 3.0, 1e-5
    fd = (eta1_closed(3, s + h) - eta1_closed(3, s - h)) / (2 * h)
    assert eta1_closed_derivative(3, s) == pytest.approx(fd, rel=1e-7)
    with pytest.raises(DomainError):
        eta1_closed(3, 0.0)


def test_eta_matches_ball():
    profile = ball_profile(4, 0.9)
    for k in range(4):
        assert eta_sqrt(4, k, profile.A(k - 1)) == pytest.approx(profile.sigma_int[k], rel=1e-9)


@pytest.mark.parametrize('n', range(2, 7))
def test_eta_positive(n):
    for k in range(n):
        s = np.linspace(0.02, 0.98, 50) * s_bound(n, k - 1)
        assert np.all(eta(n, k, s) > 0)


@pytest.mark.parametrize('n', range(2, 7))
def test_lower_curvature_integral_positive(n):
    for k in range(1, n):
        s = np.linspace(0.02, 0.98, 50) * s_bound(n, k - 1)
        assert np.all(lower_curvature_integral(n, k, s) > 0)


def test_lower_curvature_integral_matches_ball():
    profile = ball_profile(5, 0.8)
    for k in range(1, 5):
        assert lower_curvature_integral(5, k, profile.A(k - 1)) == pytest.approx(profile.sigma_int[k - 1], rel=1e-9)


def test_ode_rhs_k1_matches_closed_derivative():
    s = np.linspace(0.05, 0.95, 20) * s_bound(3, 0)
    expected = eta1_closed_derivative(3, s)
    actual = eta_ode_rhs(3, 1, s, eta1_closed(3, s))
    np.testing.assert_allclose(actual, expected, rtol=0, atol=1e-9 * np.max(np.abs(expected)))


def test_ode_rhs_example():
    s = ball_profile(3, 0.6).A(1)
    h = 1e-5 * s
    fd = (eta(3, 2, s + h) - eta(3, 2, s - h)) / (2 * h)
    assert eta_ode_rhs(3, 2, s, eta(3, 2, s)) == pytest.approx(fd, rel=1e-4)


@pytest.mark.parametrize('n', range(3, 7))
def test_ode_rhs_matches_finite_differences(n):
    for k in range(2, n):
        bound = s_bound(n, k - 1)
        s = np.linspace(0.05, 0.95, 50) * bound
        h = 1e-5 * bound
        fd = (np.asarray(eta(n, k, s + h)) - np.asarray(eta(n, k, s - h))) / (2 * h)
        rhs = np.asarray(eta_ode_rhs(n, k, s, eta(n, k, s)))
        # eta_k peaks inside the domain, so compare against the size of the derivative
        assert np.max(np.abs(rhs - fd)) <= 1e-4 * np.max(np.abs(fd))


def test_ode_integration_against_closed_form():
    grid = np.linspace(0.5, 3.0, 51)
    values = eta_ode_integrate(2, 1, grid[0], eta1_closed(2, grid[0]), grid[1:])
    np.testing.assert_allclose(values, eta1_closed(2, grid), rtol=1e-6)


@pytest.mark.parametrize('n,k', [(n, k) for n in range(3, 7) for k in range(2, n)])
def test_ode_integration_against_parametric(n, k):
    bound = s_bound(n, k - 1)
    grid = np.linspace(0.25, 0.75, 51) * bound
    values = eta_ode_integrate(n, k, grid[0], eta(n, k, grid[0]), grid[1:], substeps=4)
    np.testing.assert_allclose(values, eta(n, k, grid), rtol=1e-4)


def test_ode_integration_leaves_domain():
    bound = s_bound(3, 1)
    with pytest.raises(ComputationError):
        eta_ode_integrate(3, 2, 0.5 * bound, eta(3, 2, 0.5 * bound), [1.1 * bound])


def test_eta_examples():
    assert eta(2, 1, 2 * math.pi) == pytest.approx(16 * math.pi**2, rel=1e-10)
    assert eta1_closed(2, 2 * math.pi) == pytest.approx(16 * math.pi**2, rel=1e-12)
    assert eta(3, 0, 4 * math.pi**2 / 3) == pytest.approx(4 * math.pi**4, rel=1e-10)


@pytest.mark.parametrize('n', [2, 3, 5])
def test_ball_derivatives(n):
    rho, h = 0.9, 1e-5
    sigma_int, _ = ball_table(n, rho)
    _, quermass = ball_table(n, np.array([rho - h, rho + h]))
    derivative = (quermass[:, 1] - quermass[:, 0]) / (2 * h)
    # dVol/drho = Area and dA_{k-1}/drho = k int sigma_k
    assert derivative[0] == pytest.approx(sigma_int[0], rel=1e-6)
    for k in range(1, n + 1):
        assert derivative[k] == pytest.approx(k * sigma_int[k], rel=1e-6)
