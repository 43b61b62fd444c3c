from __future__ import annotations

import math

import numpy as np
import pytest

from kolbif.errors import DegenerateCoefficientsError, SignCaseError
from kolbif.model import (
    Coefficients,
    Orientation,
    ParamPoint,
    RawCoefficients,
    canonical_state,
    canonicalize,
    jacobian,
    raw_vector_field,
    vector_field,
)

ZERO = ParamPoint(0.0, 0.0)


def raw(p11=0.0, p12=0.0, p13=0.0, p21=0.0, p22=0.0, p23=0.0, s1=0.0, s2=0.0, mu=ZERO):
    return RawCoefficients(mu, p11, p12, p13, p21, p22, p23, s1, s2)


def test_canonicalize_forward_ratios():
    c, o = canonicalize(raw(p11=-1, p12=-1, p21=1, p22=1))
    assert (c.theta, c.gamma, c.delta) == (1.0, -1.0, -1.0)
    assert (c.M, c.N, c.S, c.P) == (0.0, 0.0, 0.0, 0.0)
    assert o is Orientation.FORWARD
    assert o.time_factor == 2.0


def test_canonicalize_reversed_frame():
    c, o = canonicalize(raw(p11=2, p12=1, p21=-3, p22=-1))
    assert (c.theta, c.gamma, c.delta) == (2.0, -1.0, -3.0)
    assert o is Orientation.REVERSED
    assert o.time_factor == -2.0
    assert o.map_mu(ParamPoint(0.1, -0.2)) == ParamPoint(-0.1, 0.2)


def test_positive_product_rejected():
    with pytest.raises(SignCaseError):
        canonicalize(raw(p12=2, p22=3))


def test_zero_product_rejected():
    with pytest.raises(SignCaseError):
        raw(p12=0.0, p22=1.0)


@pytest.mark.parametrize(
    "r",
    [
        raw(p11=-0.7, p12=-1.3, p13=0.4, p21=0.9, p22=2.1, p23=-0.3, s1=0.2, s2=0.5, mu=ParamPoint(0.03, -0.02)),
        raw(p11=1.1, p12=0.8, p13=-0.6, p21=-0.4, p22=-1.7, p23=0.7, s1=-0.3, s2=0.9, mu=ParamPoint(-0.01, 0.04)),
    ],
)
def test_raw_and_canonical_fields_agree(r):
    c, o = canonicalize(r)
    mu = o.map_mu(r.mu)
    rng = np.random.default_rng(5)
    for x, y in rng.uniform(0.01, 0.3, (20, 2)):
        dx, dy = raw_vector_field(r, x, y)
        xi1, xi2 = canonical_state(r, x, y)
        f1, f2 = vector_field(c, mu, (xi1, xi2))
        # d xi / d tau = (|p12| dx, |p22| dy) and d/dtau = time_factor * d/dt
        lhs = np.array([abs(r.p12) * dx, abs(r.p22) * dy])
        rhs = o.time_factor * np.array([f1, f2])
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=0.0)


def test_origin_is_equilibrium():
    c = Coefficients(0.7, -1.3, 0.4, 0.1, -0.2, 0.3, -0.4)
    assert vector_field(c, ParamPoint(0.05, -0.02), (0.0, 0.0)) == (0.0, 0.0)


def test_axis_invariance():
    c = Coefficients(0.7, -1.3, 0.4, 0.1, -0.2, 0.3, -0.4)
    assert vector_field(c, ParamPoint(0.05, -0.02), (0.0, 0.3))[0] == 0.0
    assert vector_field(c, ParamPoint(0.05, -0.02), (0.3, 0.0))[1] == 0.0


def test_interior_equilibrium_of_linear_case():
    c = Coefficients(-2.0, -1.0, 1.0)
    f = vector_field(c, ParamPoint(-0.03, 0.01), (0.02, 0.01))
    assert max(abs(v) for v in f) < 1e-17


def test_jacobian_at_origin_is_diagonal_mu():
    c = Coefficients(0.7, -1.3, 0.4, 0.1, -0.2, 0.3, -0.4)
    assert np.array_equal(jacobian(c, ParamPoint(-0.03, 0.01), (0.0, 0.0)), np.diag([-0.03, 0.01]))


def test_jacobian_hand_derivative():
    # d/dxi1 of xi1*(-theta*xi1) at xi1 = 1 is -2*theta
    c = Coefficients(1.0, -0.5, 0.25)
    j = jacobian(c, ZERO, (1.0, 0.0))
    assert np.allclose(j, [[-2.0, c.gamma], [0.0, -c.delta]])


def test_jacobian_matches_finite_differences():
    c = Coefficients(0.7, -1.3, 0.4, 0.1, -0.2, 0.3, -0.4)
    mu = ParamPoint(0.02, -0.03)
    x = np.array([0.13, 0.21])
    h = 1e-6
    fd = np.empty((2, 2))
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd[:, j] = (np.array(vector_field(c, mu, x + e)) - np.array(vector_field(c, mu, x - e))) / (2 * h)
    assert np.allclose(jacobian(c, mu, x), fd, rtol=1e-8, atol=1e-12)


@pytest.mark.parametrize("bad", [(1.0, 0.5, 1.0), (0.0, -1.0, 1.0), (1.0, -1.0, 0.0), (1.0, -1.0, -1.0)])
def test_validate_rejects_out_of_scope(bad):
    with pytest.raises(DegenerateCoefficientsError):
        Coefficients(*bad).validate()


def test_param_point_radius():
    assert math.isclose(ParamPoint(0.03, 0.04).norm, 0.05)
    with pytest.raises(ValueError):
        ParamPoint(0.2, 0.0).check_radius(0.1)
