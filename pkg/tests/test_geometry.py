import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ra_isac.geometry import (
    ArrayGeometry,
    derivative_norm_sq,
    effective_angle,
    element_offsets,
    steering_derivative,
    steering_vector,
)

angles = st.floats(min_value=-math.pi, max_value=math.pi, allow_nan=False)
sizes = st.integers(min_value=2, max_value=64)


@pytest.mark.parametrize(
    "m, expected",
    [
        (2, [-0.25, 0.25]),
        (3, [-0.5, 0.0, 0.5]),
        (16, np.arange(-3.75, 3.76, 0.5)),
    ],
)
def test_element_offsets(m, expected):
    np.testing.assert_allclose(element_offsets(m, 0.5), expected, atol=1e-15)


def test_element_offsets_rejects_single_element():
    with pytest.raises(ValueError):
        element_offsets(1, 0.5)


@given(sizes, st.floats(min_value=0.1, max_value=2.0))
def test_offsets_symmetric_increasing_with_aperture(m, spacing):
    d = element_offsets(m, spacing)
    np.testing.assert_allclose(d, -d[::-1], atol=1e-12)
    assert np.all(np.diff(d) > 0)
    assert d[-1] - d[0] == pytest.approx((m - 1) * spacing)


@pytest.mark.parametrize("nominal, rotation, expected", [
    (math.pi / 6, -math.pi / 6, 0.0),
    (0.0, 0.0, 0.0),
    (math.pi / 4, math.pi / 12, math.pi / 3),
])
def test_effective_angle(nominal, rotation, expected):
    assert effective_angle(nominal, rotation) == pytest.approx(expected, abs=1e-15)


def test_steering_broadside_is_all_ones():
    np.testing.assert_allclose(steering_vector(ArrayGeometry(7), 0.0), np.ones(7))


def test_steering_two_elements_endfire():
    np.testing.assert_allclose(steering_vector(ArrayGeometry(2), math.pi / 2), [-1j, 1j], atol=1e-15)


def test_steering_matches_elementwise_formula():
    g = ArrayGeometry(16)
    theta = math.pi / 6
    expected = [complex(math.cos(2 * math.pi * d * math.sin(theta)), math.sin(2 * math.pi * d * math.sin(theta)))
                for d in (-3.75 + 0.5 * i for i in range(16))]
    a = steering_vector(g, theta)
    np.testing.assert_allclose(a, expected, atol=1e-13)
    assert np.sum(np.abs(a) ** 2) == pytest.approx(16.0)


def test_steering_matrix_for_angle_array():
    g = ArrayGeometry(5)
    grid = np.array([-0.3, 0.0, 0.7])
    a = steering_vector(g, grid)
    assert a.shape == (5, 3)
    np.testing.assert_allclose(a[:, 2], steering_vector(g, 0.7))


@given(sizes, angles)
def test_steering_norm_is_element_count(m, theta):
    a = steering_vector(ArrayGeometry(m), theta)
    np.testing.assert_allclose(np.abs(a), 1.0, rtol=1e-14)
    assert np.sum(np.abs(a) ** 2) == pytest.approx(m, rel=1e-13)


def test_derivative_zero_at_endfire():
    np.testing.assert_allclose(steering_derivative(ArrayGeometry(9), math.pi / 2), 0.0, atol=1e-13)


def test_derivative_two_elements_broadside():
    np.testing.assert_allclose(steering_derivative(ArrayGeometry(2), 0.0), [-1j * math.pi / 2, 1j * math.pi / 2])


def test_derivative_norm_matches_finite_difference():
    g = ArrayGeometry(16)
    theta, h = 0.3, 1e-6
    fd = (steering_vector(g, theta + h) - steering_vector(g, theta - h)) / (2 * h)
    np.testing.assert_allclose(steering_derivative(g, theta), fd, atol=1e-6)
    assert np.sum(np.abs(fd) ** 2) == pytest.approx(3062.6078711242108, rel=1e-8)


@pytest.mark.parametrize("m", range(2, 65))
def test_derivative_norm_closed_form(m):
    g = ArrayGeometry(m)
    theta = 0.4
    direct = np.sum(np.abs(steering_derivative(g, theta)) ** 2)
    assert derivative_norm_sq(g, theta) == pytest.approx(direct, rel=1e-12)


@given(sizes, st.floats(min_value=-1.5, max_value=1.5))
def test_finite_difference_error_is_second_order(m, theta):
    g = ArrayGeometry(m)
    exact = steering_derivative(g, theta)
    errs = []
    for h in (1e-3, 1e-4):
        fd = (steering_vector(g, theta + h) - steering_vector(g, theta - h)) / (2 * h)
        errs.append(np.linalg.norm(fd - exact))
    # third derivative scales like (k D)^3 sqrt(M)
    c = (2 * math.pi * g.aperture) ** 3 * math.sqrt(m)
    assert errs[0] <= c * 1e-6
    assert errs[1] <= c * 1e-8 + 1e-9 * m


@given(angles, angles)
def test_only_effective_angle_matters(theta, phi):
    g = ArrayGeometry(8)
    np.testing.assert_allclose(
        steering_vector(g, effective_angle(theta, phi)),
        steering_vector(g, effective_angle(theta + phi, 0.0)),
        atol=1e-9,
    )
