import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ilmbm.bundle import (convexification_parameter, linearization_data, linearization_error,
                          make_bundle_element)
from reference import bundle_scalars

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def vec(n):
    return st.lists(finite, min_size=n, max_size=n).map(np.array)


# -- linearization error ---------------------------------------------------


@pytest.mark.parametrize("f_hat, f_y, xi, x, y, expected", [
    (5.0, 5.0, (7.0, -3.0), (1.0, 2.0), (1.0, 2.0), 0.0),
    (1.0, 0.0, (1.0, 0.0), (0.0, 0.0), (1.0, 0.0), 2.0),
    (0.0, 1.0, (0.0, 0.0), (0.0, 0.0), (1.0, 1.0), -1.0),
])
def test_linearization_error_examples(f_hat, f_y, xi, x, y, expected):
    assert linearization_error(f_hat, f_y, xi, x, y) == pytest.approx(expected, abs=1e-15)


def test_linearization_error_rejects_mismatched_dimensions():
    with pytest.raises(ValueError):
        linearization_error(0.0, 0.0, [1.0, 2.0], [0.0, 0.0], [0.0, 0.0, 0.0])


# -- convexification parameter ---------------------------------------------


def test_eta_nonnegative_alpha_returns_gamma():
    assert convexification_parameter(0.3, [0.0, 0.0], [1.0, 2.0], 0.5) == 0.5


def test_eta_coincident_points_returns_gamma():
    assert convexification_parameter(-7.0, [1.0, 1.0], [1.0, 1.0], 0.5) == 0.5


def test_eta_negative_alpha():
    # |y - x|^2 = 4
    eta = convexification_parameter(-1.0, [0.0, 0.0], [2.0, 0.0], 0.5)
    assert eta == pytest.approx(2.0 / 4.0 + 0.5)


def test_eta_tiny_distance_uses_coincident_branch():
    eta = convexification_parameter(-1.0, [0.0], [1e-160], 0.5)
    assert eta == 0.5


@pytest.mark.parametrize("gamma", [0.0, -1.0])
def test_eta_requires_positive_gamma(gamma):
    with pytest.raises(ValueError):
        convexification_parameter(0.0, [0.0], [1.0], gamma)


def test_linearization_data_bundles_both():
    data = linearization_data(0.0, 1.0, [0.0, 0.0], [0.0, 0.0], [2.0, 0.0], 0.5)
    assert data.alpha == pytest.approx(-1.0)
    assert data.eta == pytest.approx(2.0 / 4.0 + 0.5)
    assert data.gamma == 0.5


@given(alpha=finite, x=vec(3), y=vec(3), gamma=st.floats(1e-6, 10.0))
def test_eta_at_least_gamma(alpha, x, y, gamma):
    assert convexification_parameter(alpha, x, y, gamma) >= gamma


# -- bundle elements -------------------------------------------------------


def test_element_at_basic_point():
    x = np.array([1.0, -2.0])
    xi = np.array([0.5, 3.0])
    e = make_bundle_element(x, x.copy(), xi, 4.0, 4.0, 0.5)
    np.testing.assert_array_equal(e.y, x)
    np.testing.assert_array_equal(e.xi_mod, xi)
    assert e.beta == 0.0


def test_element_beta_bound_equality_case():
    # alpha = f_hat - f_y + xi.(y - x) = 0 - 1 + 0 = -1 and |y - x|^2 = 4
    e = make_bundle_element([0.0, 0.0], [2.0, 0.0], [0.0, 0.0], 1.0, 0.0, 0.5)
    assert e.eta == pytest.approx(1.0)
    assert e.beta == pytest.approx(1.0)
    assert e.beta == pytest.approx(0.5 * 0.5 * 4.0)


def test_element_positive_alpha():
    # alpha = f_hat - f_y + xi.(y - x) = 0.3 - 2 + 2 = 0.3
    e = make_bundle_element([0.0, 0.0], [1.0, 0.0], [2.0, 0.0], 2.0, 0.3, 0.5)
    np.testing.assert_allclose(e.xi_mod, [2.5, 0.0])
    assert e.beta == pytest.approx(0.55)
    assert e.eta == 0.5


@given(x=vec(4), y=vec(4), xi=vec(4), f_y=finite, f_hat=finite, gamma=st.floats(1e-3, 10.0))
def test_element_matches_scalar_reference(x, y, xi, f_y, f_hat, gamma):
    e = make_bundle_element(x, y, xi, f_y, f_hat, gamma)
    alpha, eta, xi_mod, beta = bundle_scalars(x, y, xi, f_y, f_hat, gamma)
    scale = 1.0 + abs(f_hat) + abs(f_y) + float(np.abs(xi).sum() * np.abs(y - x).sum())
    if float((y - x) @ (y - x)) >= 1e-300:
        assert e.eta == pytest.approx(eta, rel=1e-9, abs=1e-9 * scale)
        assert e.beta == pytest.approx(beta, rel=1e-9, abs=1e-9 * scale * (1 + eta))
        np.testing.assert_allclose(e.xi_mod, xi_mod, rtol=1e-9, atol=1e-9 * scale * (1 + eta))


@given(x=vec(5), y=vec(5), xi=vec(5), f_y=finite, f_hat=finite, gamma=st.floats(1e-3, 10.0))
def test_beta_lower_bound(x, y, xi, f_y, f_hat, gamma):
    e = make_bundle_element(x, y, xi, f_y, f_hat, gamma)
    dist_sq = float((y - x) @ (y - x))
    # rounding in alpha + eta/2 |y-x|^2 scales with the magnitudes involved
    slack = 1e-12 * (1 + abs(e.beta)) + 1e-13 * (abs(f_hat) + abs(f_y) + float(np.abs(xi) @ np.abs(y - x)))
    assert e.beta >= 0.5 * gamma * dist_sq - slack


@given(x=vec(3), d=vec(3), xi=vec(3), f_y=finite, f_hat=finite,
       t=st.floats(1e-6, 1.0), gamma=st.floats(1e-3, 10.0))
def test_null_step_inequality(x, d, xi, f_y, f_hat, t, gamma):
    y = x + t * d
    # a null step always moves away from the basic point
    assume(float((y - x) @ (y - x)) >= 1e-300)
    e = make_bundle_element(x, y, xi, f_y, f_hat, gamma)
    lhs = -e.beta + float((y - x) @ e.xi_mod)
    slack = 1e-10 * (1 + abs(f_hat)) + 1e-12 * (abs(f_y) + float(np.abs(xi) @ np.abs(y - x))
                                                 + e.eta * float((y - x) @ (y - x)))
    assert lhs >= f_y - f_hat - slack


def test_null_step_gap_equals_eta_term():
    # -beta + s.xi_mod - (f_y - f_hat) reduces to eta/2 |s|^2
    x, y = np.zeros(2), np.array([1.0, 1.0])
    e = make_bundle_element(x, y, [0.0, 0.0], 3.0, 0.0, 0.5)
    lhs = -e.beta + float((y - x) @ e.xi_mod)
    assert e.eta == pytest.approx(3.5)
    assert lhs - 3.0 == pytest.approx(0.5 * e.eta * 2.0)
