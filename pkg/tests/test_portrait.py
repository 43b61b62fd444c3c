from __future__ import annotations

import numpy as np
import pytest

from kolbif.curves import hopf_point
from kolbif.equilibria import EquilibriumId
from kolbif.errors import DegenerateHopfError, NoCycleFound, PreconditionError
from kolbif.model import Coefficients, ParamPoint, hessian, jacobian, third_derivative
from kolbif.portrait import (
    detect_cycle,
    first_lyapunov_coefficient,
    lyapunov_l1,
    phase_portrait,
    render_portrait,
)
from kolbif.presets import PRESETS

CASE_I = PRESETS["I"].coefficients
CASE_VII = PRESETS["VII"].coefficients


def test_region_five_portrait():
    p = phase_portrait(CASE_I, ParamPoint(-0.035, -0.035), n_seeds=3)
    assert [p.equilibria[k].status for k in EquilibriumId] == ["sn", "s", "s", "un"]
    assert len(p.orbits) > 0
    assert p.nullclines["xi1"] and p.nullclines["xi2"]


def test_portrait_at_origin_has_one_degenerate_point():
    p = phase_portrait(CASE_I, ParamPoint(0.0, 0.0), n_seeds=2, t_span=10.0)
    states = {tuple(cl.equilibrium.state) for cl in p.equilibria.values()}
    assert states == {(0.0, 0.0)}
    assert all(cl.cls.kind.value == "nonhyperbolic" for cl in p.equilibria.values())


def test_orbits_csv_and_svg(tmp_path):
    p = phase_portrait(CASE_I, ParamPoint(-0.035, -0.035), n_seeds=2)
    assert p.orbits_csv().splitlines()[0] == "orbit,t,xi1,xi2"
    a = render_portrait(p, tmp_path / "a.svg").read_bytes()
    b = render_portrait(p, tmp_path / "b.svg").read_bytes()
    assert a == b


def test_l1_estimators_agree():
    hd = lyapunov_l1(CASE_VII, hopf_point(CASE_VII, 0.01))
    assert hd.l1 < 0
    assert hd.l1_return_map == pytest.approx(hd.l1, rel=0.02)
    assert hd.omega > 0
    assert not hd.notes


def test_l1_degenerate_without_cubic_terms():
    c = Coefficients(1.0, -1.0, -2.0)
    with pytest.raises(DegenerateHopfError):
        lyapunov_l1(c, hopf_point(c, 0.01))


def test_l1_flips_under_time_reversal():
    hp = hopf_point(CASE_VII, 0.01)
    from kolbif.equilibria import locate_E3

    x = locate_E3(CASE_VII, hp).state.as_array()
    a = jacobian(CASE_VII, hp, x)
    hs, ts = hessian(CASE_VII, x), third_derivative(CASE_VII)
    fwd = first_lyapunov_coefficient(a, hs, ts)
    rev = first_lyapunov_coefficient(-a, -hs, -ts)
    assert rev == pytest.approx(-fwd, rel=1e-12)


def test_off_curve_point_rejected():
    hp = hopf_point(CASE_VII, 0.01)
    with pytest.raises(PreconditionError):
        lyapunov_l1(CASE_VII, ParamPoint(hp.mu1, hp.mu2 + 1e-4))


def test_cycle_above_hopf_curve():
    hp = hopf_point(CASE_VII, 0.05)
    mu = ParamPoint(0.05, hp.mu2 + 1e-3 * hp.norm)
    cyc = detect_cycle(CASE_VII, mu)
    assert cyc.terminal_reason == "cycle_detected"
    assert cyc.period > 0
    # closed orbit: the end point returns to the start
    assert np.linalg.norm(cyc.xi[-1] - cyc.xi[0]) <= 1e-7 * cyc.radius + 1e-12


def test_no_cycle_in_case_I():
    with pytest.raises(NoCycleFound):
        detect_cycle(CASE_I, ParamPoint(-0.03, 0.01))


def test_no_isolated_cycle_on_the_curve():
    with pytest.raises(NoCycleFound):
        detect_cycle(CASE_VII, hopf_point(CASE_VII, 0.01))


def test_no_cycle_below_hopf_curve():
    hp = hopf_point(CASE_VII, 0.05)
    with pytest.raises(NoCycleFound):
        detect_cycle(CASE_VII, ParamPoint(0.05, hp.mu2 - 1e-3 * hp.norm))
