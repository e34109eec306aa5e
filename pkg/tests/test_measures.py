import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from configdensity import (
    ConfigDensityError,
    circle_quadrature,
    nu_abs_circle_average,
    nu_abs_theta_integral,
    nu_hat_closed,
    nu_hat_numeric,
    ray_quadrature,
    sphere_directions,
)
from configdensity.measures import default_circle_nodes, perp

unit_angle = st.floats(0, 2 * math.pi)


def test_circle_nodes_exact_at_quarter_turns():
    cq = circle_quadrature(8)
    assert cq.nodes[0].tolist() == [1.0, 0.0]
    assert cq.nodes[2].tolist() == [0.0, 1.0]
    assert cq.nodes[4].tolist() == [-1.0, 0.0]
    assert cq.weights.sum() == pytest.approx(1.0)
    assert np.allclose(cq.perp, perp(cq.nodes))


def test_quadrature_errors():
    with pytest.raises(ConfigDensityError) as e:
        circle_quadrature(3)
    assert e.value.code == "too_few_nodes"
    with pytest.raises(ConfigDensityError):
        ray_quadrature(1)


def test_ray_quadrature_moments():
    rq = ray_quadrature(64)
    for k in range(6):
        assert np.sum(rq.weights * rq.nodes ** k) == pytest.approx(math.factorial(k), rel=1e-12)


def test_sphere_directions_unit_and_balanced():
    d = sphere_directions(400)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
    assert np.linalg.norm(d.mean(axis=0)) < 0.01


def test_nu_hat_reference_value():
    assert complex(nu_hat_closed([1.0, 0.0], 1.0, [1 / (2 * math.pi), 0.0])) == pytest.approx(0.5 - 0.5j)


@given(unit_angle, st.floats(0.01, 3), st.floats(0, 10), unit_angle)
def test_nu_hat_numeric_matches_closed(phi, alpha, r, psi):
    y = np.array([math.cos(phi), math.sin(phi)])
    xi = r * np.array([math.cos(psi), math.sin(psi)])
    assert abs(nu_hat_numeric(y, alpha, xi) - complex(nu_hat_closed(y, alpha, xi))) < 1e-10


@given(unit_angle, st.floats(0.01, 3), st.floats(0, 100), unit_angle)
def test_nu_hat_modulus_at_most_one(phi, alpha, r, psi):
    y = np.array([math.cos(phi), math.sin(phi)])
    xi = r * np.array([math.cos(psi), math.sin(psi)])
    assert abs(complex(nu_hat_closed(y, alpha, xi))) <= 1.0 + 1e-15


def test_nu_hat_rejects_non_unit_direction():
    with pytest.raises(ConfigDensityError):
        nu_hat_closed([1.0, 1.0], 0.5, [0.1, 0.2])
    with pytest.raises(ConfigDensityError):
        nu_hat_numeric([1.0, 0.0], 0.0, [0.1, 0.2])


@pytest.mark.parametrize("r", [0.0, 0.01, 0.5, 3.0, 47.0, 999.0])
def test_theta_integral_matches_elliptic_k(r):
    ref = 2 / math.pi * special.ellipk(-(2 * math.pi * r) ** 2)
    assert nu_abs_theta_integral(r) == pytest.approx(ref, abs=1e-8)


@given(st.floats(0, 1000), unit_angle, st.floats(0.05, 2))
def test_circle_average_equals_theta_integral_and_bounds(r, psi, alpha):
    xi = r * np.array([math.cos(psi), math.sin(psi)])
    val = nu_abs_circle_average(xi, alpha)
    assert val == pytest.approx(nu_abs_theta_integral(r), abs=1e-6)
    assert val <= (1 + 4 * math.pi ** 2 * r * r) ** -0.25 + 1e-6
    assert val <= min(1.0, r ** -0.5 if r > 0 else 1.0) + 1e-6


def test_default_node_rule_multiple_of_four():
    for r in (0.0, 1.3, 77.7, 1000.0):
        n = default_circle_nodes(r)
        assert n % 4 == 0 and n >= 256 and n >= 128 * r
