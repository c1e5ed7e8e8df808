import numpy as np
import pytest
from hypothesis import given, strategies as st

from ridg.basis import (Truncation, basis_eval, default_points, face_rule, gauss_rule, gram_matrix, legendre,
                        legendre_deriv, spacetime_spec, spatial_spec)
from ridg.errors import DomainError


@pytest.mark.parametrize("m,d", [(0, 1), (3, 1), (5, 1), (2, 2), (4, 2), (3, 3)])
def test_spatial_orthonormal(m, d):
    G = gram_matrix(spatial_spec(m, d))
    assert np.abs(G - np.eye(len(G))).max() < 1e-12


@pytest.mark.parametrize("m,d,tr", [(2, 1, Truncation.TENSOR_PRODUCT), (3, 2, Truncation.TENSOR_PRODUCT),
                                    (3, 1, Truncation.TOTAL_DEGREE), (2, 3, Truncation.TENSOR_PRODUCT)])
def test_spacetime_orthonormal(m, d, tr):
    G = gram_matrix(spacetime_spec(m, d, tr))
    assert np.abs(G - np.eye(len(G))).max() < 1e-12


def test_sizes():
    assert spatial_spec(3, 1).size == 4
    assert spatial_spec(3, 2).size == 10
    assert spatial_spec(3, 3).size == 20
    assert spacetime_spec(3, 1).size == 16
    assert spacetime_spec(3, 2).size == 64
    assert spacetime_spec(2, 1, Truncation.TOTAL_DEGREE).size == 6


def test_first_functions():
    x = np.array([[-1.0], [0.3], [1.0]])
    v = basis_eval(spatial_spec(2, 1), x)
    assert np.allclose(v[:, 0], 1.0)
    assert np.allclose(v[:, 1], np.sqrt(3) * x[:, 0])
    assert np.allclose(v[:, 2], np.sqrt(5) * 0.5 * (3 * x[:, 0] ** 2 - 1))


def test_legendre_endpoints():
    n = np.arange(8)
    assert np.allclose(legendre(7, 1.0), np.sqrt(2 * n + 1))
    assert np.allclose(legendre(7, -1.0), (-1.0) ** n * np.sqrt(2 * n + 1))


@given(st.integers(0, 7), st.floats(-0.99, 0.99))
def test_legendre_derivative_matches_difference(n, x):
    h = 1e-6
    fd = (legendre(n, x + h) - legendre(n, x - h)) / (2 * h)
    assert np.allclose(legendre_deriv(n, x), fd, atol=1e-5)


@given(st.integers(1, 6), st.integers(1, 3))
def test_gauss_rule_exactness(n, d):
    rule = gauss_rule(n, d)
    assert rule.weights.sum() == pytest.approx(2.0**d)
    # x_0^(2n-2) integrates exactly
    k = 2 * n - 2
    assert rule.integrate(rule.nodes[:, 0] ** k) == pytest.approx(2.0 ** (d - 1) * 2 / (k + 1))


def test_face_rule_on_face():
    r = face_rule(3, 3, 1, -1.0)
    assert np.all(r.nodes[:, 1] == -1.0)
    assert r.weights.sum() == pytest.approx(4.0)


def test_default_points():
    assert default_points(3) == 5


def test_invalid_specs():
    with pytest.raises(DomainError):
        spatial_spec(-1, 1)
    with pytest.raises(DomainError):
        spatial_spec(1, 4)
    with pytest.raises(DomainError):
        gauss_rule(0, 1)
