from __future__ import annotations

import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from kolbif.classify import Kind, char_quantities_E3, classify_equilibrium, oracle_check
from kolbif.curves import delta_closed_form, quad_coeffs
from kolbif.equilibria import locate_E3
from kolbif.errors import EquilibriumError
from kolbif.integrate import integrate_batch
from kolbif.model import Coefficients, ParamPoint, RawCoefficients, canonical_state, canonicalize, raw_vector_field, vector_field

mag = st.floats(0.2, 3.0)
sign = st.sampled_from([-1.0, 1.0])
cubic = st.floats(-1.0, 1.0)
# zero or at least 1e-12 in size; smaller values make E3 subnormal
small = st.one_of(st.just(0.0), st.floats(-0.035, 0.035).filter(lambda v: abs(v) >= 1e-12))


@st.composite
def coefficients(draw, with_cubic=True):
    th = draw(sign) * draw(mag)
    g = -draw(mag)
    de = draw(sign) * draw(mag)
    assume(abs(th - g * de) > 0.1)
    mnsp = [draw(cubic) for _ in range(4)] if with_cubic else [0.0] * 4
    return Coefficients(th, g, de, *mnsp)


@settings(max_examples=200, deadline=None)
@given(coefficients(with_cubic=False))
def test_discriminant_identity(c):
    qc = quad_coeffs(c)
    ref = delta_closed_form(c)
    assert abs(qc.Delta - ref) <= 1e-10 * abs(ref)


@settings(max_examples=200, deadline=None)
@given(coefficients(), small, small)
def test_closed_forms_match_numerical_jacobian(c, m1, m2):
    mu = ParamPoint(m1, m2)
    try:
        e = locate_E3(c, mu)
    except EquilibriumError:
        return  # no interior root near the origin for this draw
    assert oracle_check(c, mu, e, floor=0.0, check_eigenvalues=False).passed


@settings(max_examples=200, deadline=None)
@given(coefficients(), small, small)
def test_q_is_p_squared_minus_L(c, m1, m2):
    mu = ParamPoint(m1, m2)
    try:
        e = locate_E3(c, mu)
    except EquilibriumError:
        return
    pq = char_quantities_E3(c, e)
    assert math.isclose(pq.q, pq.p**2 - pq.L, rel_tol=1e-9, abs_tol=1e-15 * max(pq.p**2, abs(pq.L)))


def mu_for_interior_point(c: Coefficients, x1: float, x2: float) -> ParamPoint:
    """The parameter at which (x1, x2) is an interior equilibrium."""
    return ParamPoint(
        c.theta * x1 - c.gamma * x2 + c.M * x1 * x2 - c.N * x1**2,
        c.delta * x1 - x2 - c.S * x1**2 - c.P * x2**2,
    )


interior = st.floats(1e-4, 0.01)


@settings(max_examples=150, deadline=None)
@given(mag, mag, st.floats(0.1, 3.0), interior, interior, st.lists(cubic, min_size=4, max_size=4))
def test_stable_sign_case_gives_unstable_node(g, de, gap, x1, x2, mnsp):
    c = Coefficients(-g * de - gap, -g, de, *mnsp)  # theta < gamma*delta < 0, delta > 0
    mu = mu_for_interior_point(c, x1, x2)
    e = locate_E3(c, mu)
    assert math.isclose(e.state.xi1, x1, rel_tol=1e-6) and math.isclose(e.state.xi2, x2, rel_tol=1e-6)
    assert classify_equilibrium(c, mu, e).cls.kind is Kind.UNSTABLE_NODE


@settings(max_examples=150, deadline=None)
@given(mag, sign, mag, st.floats(0.1, 3.0), interior, interior, st.lists(cubic, min_size=4, max_size=4))
def test_positive_D_gives_saddle(g, sd, de, gap, x1, x2, mnsp):
    d = sd * de
    c = Coefficients(-g * d + gap, -g, d, *mnsp)  # theta - gamma*delta = gap > 0
    assume(abs(c.theta) > 0.05)
    mu = mu_for_interior_point(c, x1, x2)
    e = locate_E3(c, mu)
    assert math.isclose(e.state.xi1, x1, rel_tol=1e-6) and math.isclose(e.state.xi2, x2, rel_tol=1e-6)
    assert classify_equilibrium(c, mu, e).cls.kind is Kind.SADDLE


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-2, 2).filter(lambda v: abs(v) > 0.1), min_size=8, max_size=8),
       st.floats(0.01, 0.5), st.floats(0.01, 0.5))
def test_raw_frame_agrees_with_canonical(p, x, y):
    p11, p12, p13, p21, p22, p23, s1, s2 = p
    assume(p12 * p22 < 0)
    r = RawCoefficients(ParamPoint(0.02, -0.01), p11, p12, p13, p21, p22, p23, s1, s2)
    c, o = canonicalize(r)
    dx, dy = raw_vector_field(r, x, y)
    f1, f2 = vector_field(c, o.map_mu(r.mu), canonical_state(r, x, y))
    lhs = np.array([abs(p12) * dx, abs(p22) * dy])
    rhs = o.time_factor * np.array([f1, f2])
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-15)


@settings(max_examples=25, deadline=None)
@given(coefficients(), small, small, st.integers(0, 2**32 - 1))
def test_orbits_never_leave_quadrant(c, m1, m2, seed):
    x0 = np.random.default_rng(seed).uniform(0, 0.2, (20, 2))
    x0[:3, 0] = 0.0
    for orb in integrate_batch(c, ParamPoint(m1, m2), x0, 100.0, box=5.0):
        assert orb.xi.min() >= 0.0
