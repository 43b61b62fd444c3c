from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from kolbif.classify import (
    CharQuantities,
    Kind,
    char_quantities_E3,
    classify,
    classify_all,
    eigenvalues,
    oracle_check,
)
from kolbif.equilibria import EquilibriumId, all_equilibria, locate_E3
from kolbif.errors import EquilibriumError
from kolbif.model import Coefficients, ParamPoint


def pq(p, L, q):
    return CharQuantities(p, L, q, 0.0, 0.0)


def test_worked_E3_quantities():
    c = Coefficients(-2.0, -1.0, 1.0)
    e = locate_E3(c, ParamPoint(-0.03, 0.01))
    got = char_quantities_E3(c, e)
    assert got.p == pytest.approx(0.025, rel=1e-12)
    assert got.L == pytest.approx(0.0002, rel=1e-12)
    assert got.q == pytest.approx(0.000425, rel=1e-12)
    assert got.q == pytest.approx(got.p**2 - got.L, rel=1e-12)


def test_quantities_vanish_at_origin_state():
    c = Coefficients(-2.0, -1.0, 1.0, 0.3, -0.2, 0.4, -0.3)
    e = locate_E3(c, ParamPoint(0.0, 0.0))
    got = char_quantities_E3(c, e)
    assert (got.p, got.L, got.q) == (0.0, 0.0, 0.0)


def test_determinant_first_order_law():
    c = Coefficients(1.0, -1.0, -2.0, 0.3, -0.2, 0.4, -0.3)
    for s in (1e-2, 1e-3, 1e-4):
        e = locate_E3(c, ParamPoint(s, -1.6 * s))
        x1, x2 = e.state
        ratio = char_quantities_E3(c, e).L / (-c.D * x1 * x2)
        assert abs(ratio - 1) < 5 * s


def test_eigenvalues_real_pair():
    ev = eigenvalues(pq(0.025, 0.0002, 0.000425)).sorted()
    assert ev[0].real == pytest.approx(0.004384, abs=1e-6)
    assert ev[1].real == pytest.approx(0.045616, abs=1e-6)
    assert all(z.imag == 0 for z in ev)


def test_eigenvalues_imaginary_pair():
    ev = eigenvalues(pq(0.0, 0.0001, -0.0001)).sorted()
    assert ev[0] == pytest.approx(complex(0, -0.01))
    assert ev[1] == pytest.approx(complex(0, 0.01))


def test_double_eigenvalue():
    ev = eigenvalues(pq(1.0, 1.0, 0.0))
    assert ev.lambda1 == ev.lambda2 == 1.0


@pytest.mark.parametrize(
    "p, L, q, kind",
    [
        (0.025, 0.0002, 0.000425, Kind.UNSTABLE_NODE),
        (0.025, -0.0002, 0.000825, Kind.SADDLE),
        (-0.025, -0.0002, 0.000825, Kind.SADDLE),
        (0.0, 1e-4, -1e-4, Kind.CENTER_CANDIDATE),
        (-0.01, 2e-4, -1e-4, Kind.STABLE_FOCUS),
        (0.01, 2e-4, -1e-4, Kind.UNSTABLE_FOCUS),
        (-0.02, 1e-4, 3e-4, Kind.STABLE_NODE),
        (0.01, 0.0, 1e-4, Kind.NONHYPERBOLIC),
    ],
)
def test_classify_table(p, L, q, kind):
    assert classify(pq(p, L, q)).kind is kind


def test_degenerate_node_is_a_node():
    assert classify(pq(-0.01, 1e-4, 0.0)).kind is Kind.STABLE_NODE


def test_boundary_eigenvalues():
    cls = classify_all(Coefficients(1.0, -1.0, 1.0), ParamPoint(0.02, 0.05))
    e1 = cls[EquilibriumId.E1]
    assert sorted(z.real for z in e1.eigen.sorted()) == pytest.approx([-0.02, 0.03], abs=1e-15)
    assert e1.cls.kind is Kind.SADDLE
    o = classify_all(Coefficients(-2.0, -1.0, 1.0), ParamPoint(-0.03, 0.01))[EquilibriumId.O]
    assert [z.real for z in o.eigen.sorted()] == pytest.approx([-0.03, 0.01])
    assert o.cls.kind is Kind.SADDLE


def test_E1_nonhyperbolic_on_mu2_axis():
    cls = classify_all(Coefficients(1.0, -1.0, 1.0), ParamPoint(0.0, 0.05))
    assert cls[EquilibriumId.E1].cls.kind is Kind.NONHYPERBOLIC


def test_oracle_passes_worked_point():
    c = Coefficients(-2.0, -1.0, 1.0)
    mu = ParamPoint(-0.03, 0.01)
    assert oracle_check(c, mu, locate_E3(c, mu)).passed


def test_oracle_detects_dropped_q_term():
    c = Coefficients(1.0, -1.0, -2.0, M=0.8, N=-0.2, S=0.4, P=0.9)
    mu = ParamPoint(0.05, -0.02)
    e = locate_E3(c, mu)
    good = char_quantities_E3(c, e)
    x1, x2 = e.state
    bad = replace(good, q=good.q - c.M * c.P * x1 * x2**3)
    assert oracle_check(c, mu, e, floor=0.0).passed
    rep = oracle_check(c, mu, e, quantities=bad, floor=0.0, check_eigenvalues=False)
    assert rep.failures == ["q"]


def test_oracle_random_sample():
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(300):
        c = Coefficients(
            rng.choice([-1, 1]) * rng.uniform(0.2, 3),
            -rng.uniform(0.2, 3),
            rng.choice([-1, 1]) * rng.uniform(0.2, 3),
            *rng.uniform(-1, 1, 4),
        )
        if abs(c.D) <= 0.1:
            continue
        mu = ParamPoint(*rng.uniform(-0.035, 0.035, 2))
        try:
            e = locate_E3(c, mu)
        except EquilibriumError:
            # no interior root near the origin for this draw
            continue
        checked += 1
        assert oracle_check(c, mu, e, floor=0.0, check_eigenvalues=False).passed
    assert checked > 250


def test_all_equilibria_classified_in_region_five():
    c = Coefficients(-2.0, -1.0, 1.0, 0.3, -0.2, 0.4, -0.3)
    cls = classify_all(c, ParamPoint(-0.035, -0.035), all_equilibria(c, ParamPoint(-0.035, -0.035)))
    assert [cls[k].status for k in EquilibriumId] == ["sn", "s", "s", "un"]
