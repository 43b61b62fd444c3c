from __future__ import annotations

import math

import pytest

from kolbif.equilibria import EquilibriumId, all_equilibria, locate_E1, locate_E2, locate_E3
from kolbif.model import Coefficients, ParamPoint, growth_rates


def test_E1_linear_case():
    e = locate_E1(Coefficients(1.0, -1.0, 1.0), ParamPoint(0.02, 0.0))
    assert e.state.xi1 == pytest.approx(0.02, abs=1e-16)
    assert e.state.xi2 == 0.0


def test_E1_quadratic_root_near_zero():
    c = Coefficients(1.0, -1.0, 1.0, N=1.0)
    e = locate_E1(c, ParamPoint(0.02, 0.0))
    assert e.state.xi1 == pytest.approx((1 - math.sqrt(0.92)) / 2, rel=1e-14)
    g1, _ = growth_rates(c, 0.02, 0.0, e.state.xi1, 0.0)
    assert abs(g1) <= 1e-15


def test_E2_linear_case():
    e = locate_E2(Coefficients(1.0, -1.0, 1.0), ParamPoint(0.0, -0.03))
    assert e.state.xi2 == pytest.approx(0.03, abs=1e-16)


def test_E2_quadratic_root_near_zero():
    c = Coefficients(1.0, -1.0, 1.0, P=1.0)
    e = locate_E2(c, ParamPoint(0.0, -0.03))
    assert e.state.xi2 == pytest.approx((-1 + math.sqrt(1.12)) / 2, rel=1e-14)
    _, g2 = growth_rates(c, 0.0, -0.03, 0.0, e.state.xi2)
    assert abs(g2) <= 1e-15


def test_axis_equilibria_collide_with_origin_on_axes():
    c = Coefficients(1.0, -1.0, 1.0)
    eqs = all_equilibria(c, ParamPoint(0.0, 0.05))
    assert eqs[EquilibriumId.E1].state.xi1 == 0.0
    assert (EquilibriumId.O, EquilibriumId.E1) in eqs.collisions
    eqs = all_equilibria(c, ParamPoint(0.05, 0.0))
    assert (EquilibriumId.O, EquilibriumId.E2) in eqs.collisions


def test_E3_linear_case_exact():
    e = locate_E3(Coefficients(-2.0, -1.0, 1.0), ParamPoint(-0.03, 0.01))
    assert e.state.xi1 == pytest.approx(0.02, abs=1e-16)
    assert e.state.xi2 == pytest.approx(0.01, abs=1e-16)
    assert e.in_q1
    assert e.iterations <= 1


def test_E3_at_origin():
    e = locate_E3(Coefficients(-2.0, -1.0, 1.0, 0.3, -0.2, 0.4, -0.3), ParamPoint(0.0, 0.0))
    assert tuple(e.state) == (0.0, 0.0)


def test_E3_collides_with_E1_on_T1():
    c = Coefficients(-2.0, -1.0, 1.0)
    mu1 = -0.01
    near = all_equilibria(c, ParamPoint(mu1, c.delta / c.theta * mu1))
    assert (EquilibriumId.E1, EquilibriumId.E3) in near.collisions
    assert abs(near[EquilibriumId.E3].state.xi2) < 1e-12


def test_all_collide_at_origin():
    eqs = all_equilibria(Coefficients(-2.0, -1.0, 1.0), ParamPoint(0.0, 0.0))
    assert len(eqs.distinct()) == 1
    assert len(eqs.collisions) == 6


def test_region_six_existence_pattern():
    # O, E1 and E3 in Q1, E2 outside
    eqs = all_equilibria(Coefficients(-2.0, -1.0, 1.0), ParamPoint(-0.0487, 0.0114))
    assert eqs[EquilibriumId.O].in_q1
    assert eqs[EquilibriumId.E1].in_q1
    assert eqs[EquilibriumId.E3].in_q1
    assert not eqs[EquilibriumId.E2].in_q1
    assert len(eqs.distinct()) == 4
