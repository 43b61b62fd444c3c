"""The property suite behind ``kolbif verify``.

Every check returns a :class:`CheckResult`; nothing raises on a failed
property. Random draws come from ``numpy.random.default_rng(seed)`` so a
run is reproducible, and the verdicts do not depend on the seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .classify import Kind, classify_equilibrium, half_trace_E3, oracle_check
from .curves import (
    CurveKind,
    curve_H,
    delta_closed_form,
    dispatch_case,
    hopf_point,
    hopf_transversality,
    hopf_transversality_expected,
    quad_coeffs,
    slope_ordering,
    sotomayor_T1,
)
from .diagram import TABLE_COLUMNS, build_report, sector_point, sectors, signature_at, verify_tables
from .equilibria import locate_E3
from .errors import KolbifError, NoCycleFound
from .integrate import integrate_batch
from .model import Coefficients, ParamPoint, jacobian
from .portrait import detect_cycle, lyapunov_l1
from .presets import PRESETS


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}  ({self.seconds:.1f}s)"

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail, "seconds": round(self.seconds, 3)}


def _timed(name):
    def wrap(fn):
        def run(*args, **kw):
            t0 = time.perf_counter()
            passed, detail = fn(*args, **kw)
            return CheckResult(name, bool(passed), detail, time.perf_counter() - t0)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


# ---------------------------------------------------------------- random draws


def random_coefficients(rng: np.random.Generator, cubic: bool = True) -> Coefficients:
    """(theta, gamma, delta) in the admissible box with |theta - gamma*delta| > 0.1."""
    while True:
        th = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 3.0)
        de = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 3.0)
        g = -rng.uniform(0.2, 3.0)
        if abs(th - g * de) > 0.1:
            break
    mnsp = rng.uniform(-1.0, 1.0, 4) if cubic else np.zeros(4)
    return Coefficients(th, g, de, *map(float, mnsp))


def random_mu(rng: np.random.Generator, radius: float) -> ParamPoint:
    r = radius * math.sqrt(rng.uniform())
    a = rng.uniform(0, 2 * math.pi)
    return ParamPoint(r * math.cos(a), r * math.sin(a))


# ---------------------------------------------------------------- checks


@_timed("oracle equivalence of closed-form p, L, q")
def check_oracle(n: int = 10_000, seed: int = 0, radius: float = 0.05, rtol: float = 1e-10):
    rng = np.random.default_rng(seed)
    failures, n_fail, redraws = [], 0, 0
    worst = {"p": 0.0, "L": 0.0, "q": 0.0}
    done = 0
    while done < n:
        c = random_coefficients(rng)
        mu = random_mu(rng, radius)
        try:
            e3 = locate_E3(c, mu)
        except KolbifError:
            redraws += 1
            continue
        rep = oracle_check(c, mu, e3, rtol=rtol, floor=0.0, check_eigenvalues=False, cancellation=False)
        for k in worst:
            a, b = rep.closed_form[k], rep.numerical[k]
            scale = max(abs(a), abs(b))
            if scale > 0:
                worst[k] = max(worst[k], abs(a - b) / scale)
        if not rep.passed:
            n_fail += 1
            if len(failures) < 5:
                failures.append({"coefficients": c.as_dict(), "mu": list(mu), "failed": rep.failures})
        done += 1
    detail = {"draws": n, "redraws": redraws, "failed": n_fail, "max_rel_error": worst, "examples": failures}
    return n_fail == 0, detail


@_timed("discriminant identity b^2 - ac = -4 gamma delta (theta - gamma delta)^3")
def check_delta_identity(n: int = 10_000, seed: int = 0, rtol: float = 1e-10):
    rng = np.random.default_rng(seed + 1)
    worst, bad = 0.0, []
    for _ in range(n):
        c = random_coefficients(rng, cubic=False)
        try:
            qc = quad_coeffs(c)
        except AssertionError as err:
            bad.append(str(err))
            continue
        ref = delta_closed_form(c)
        rel = abs(qc.Delta - ref) / abs(ref)
        worst = max(worst, rel)
        if rel > rtol:
            bad.append(f"{c.as_dict()}: relative error {rel:.3e}")
    return not bad, {"draws": n, "max_rel_error": worst, "failures": bad[:5]}


def _grid_case(rng, case: str) -> Coefficients:
    g = -rng.uniform(0.2, 3.0)
    if case == "1a":
        de = rng.uniform(0.2, 3.0)
        th = g * de - rng.uniform(0.1, 3.0)
    else:
        de = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 3.0)
        th = g * de + rng.uniform(0.1, 3.0)
        if abs(th) < 0.05:
            th = math.copysign(0.05, th) if th else 0.05
    return Coefficients(th, g, de, *map(float, rng.uniform(-1, 1, 4)))


@_timed("E3 type in the stable-sign cases (unstable node / saddle)")
def check_e3_type(n_per_case: int = 1000, seed: int = 0, radius: float = 0.05):
    rng = np.random.default_rng(seed + 2)
    detail = {}
    ok = True
    for case, expected in (("1a", Kind.UNSTABLE_NODE), ("2", Kind.SADDLE)):
        hits, wrong, tries = 0, [], 0
        while hits < n_per_case and tries < 200 * n_per_case:
            tries += 1
            c = _grid_case(rng, case)
            mu = random_mu(rng, radius)
            try:
                e3 = locate_E3(c, mu)
            except KolbifError:
                continue
            if not (e3.state.xi1 > 0 and e3.state.xi2 > 0):
                continue
            hits += 1
            kind = classify_equilibrium(c, mu, e3).cls.kind
            if kind is not expected:
                wrong.append({"coefficients": c.as_dict(), "mu": list(mu), "kind": kind.value})
        detail[case] = {"points": hits, "exceptions": len(wrong), "examples": wrong[:3]}
        ok &= hits >= n_per_case and not wrong
    return ok, detail


@_timed("region signatures against the 26 tabulated portraits")
def check_tables(radius: float = 0.1, min_columns: int = 20):
    matched: set[int] = set()
    detail: dict = {"cases": {}}
    ok = True
    for name, pre in PRESETS.items():
        failed = pre.failed_conditions()
        case = dispatch_case(pre.coefficients)
        rep = build_report(case, radius)
        chk = verify_tables(rep)
        matched |= chk.matched
        good = not failed and case.id is pre.case and chk.passed
        ok &= good
        detail["cases"][name] = {
            "dispatched": case.id.value,
            "regions": [r.index for r in rep.regions],
            "condition_failures": failed,
            "problems": chk.problems,
        }
    missing = sorted(set(TABLE_COLUMNS) - matched)
    detail["matched_columns"] = sorted(matched)
    detail["unrealized_columns"] = {
        col: f"searched all sectors of the {len(PRESETS)} built-in sets" for col in missing
    }
    return ok and len(matched) >= min_columns, detail


@_timed("slope chain of T1, C1, H, C2, T2")
def check_slope_chain():
    c = Coefficients(1.0, -1.0, -2.0)
    so = slope_ordering(c)
    expected = (-2.0, -1.8535533905932737, -1.5, -1.1464466094067263, -1.0)
    got = (so.m_T1, so.m_C1, so.m_H, so.m_C2, so.m_T2)
    close = all(abs(a - b) <= 1e-5 for a, b in zip(got, expected))
    ordered = all(a < b for a, b in zip(got, got[1:])) and got[-1] < 0
    return close and ordered, {"slopes": got, "order": [k for k, _ in so.order]}


def _re_lambda(c: Coefficients, mu: ParamPoint) -> float:
    e = locate_E3(c, mu)
    return float(np.max(np.linalg.eigvals(jacobian(c, mu, e.state)).real))


@_timed("Hopf curve: p = 0, q < 0, transversality, cycle amplitude law")
def check_hopf(mu1: float = 1e-2, cycle_mu_norm: float = 0.095, distances=(1e-4, 4e-4, 1.6e-3)):
    c = PRESETS["VII"].coefficients
    detail: dict = {}
    hp = hopf_point(c, mu1)
    e3 = locate_E3(c, hp)
    pq = classify_equilibrium(c, hp, e3).quantities
    truncated = ParamPoint(mu1, curve_H(c).slope * mu1)
    detail["p_exact"] = pq.p
    detail["q_exact"] = pq.q
    detail["p_on_truncated_line"] = half_trace_E3(c, *locate_E3(c, truncated).state)
    ok = abs(pq.p) <= 1e-6 and pq.q < 0
    h = 1e-3 * mu1
    lo = _re_lambda(c, ParamPoint(mu1, hp.mu2 - h))
    hi = _re_lambda(c, ParamPoint(mu1, hp.mu2 + h))
    expected = hopf_transversality_expected(c)
    detail["re_lambda_below_above"] = (lo, hi)
    ok &= lo * hi < 0
    for m in (mu1, 1e-3):
        slope = hopf_transversality(c, m)
        detail[f"transversality_at_{m:g}"] = slope
        ok &= abs(slope - expected) <= 0.05 * abs(expected)
    detail["transversality_expected"] = expected
    # cycle amplitude law well inside the analysis disc
    m_h = curve_H(c).slope
    m1 = cycle_mu_norm / math.hypot(1.0, m_h)
    hp2 = hopf_point(c, m1)
    hd = lyapunov_l1(c, hp2)
    detail["l1"] = hd.l1
    detail["l1_return_map"] = hd.l1_return_map
    ok &= not hd.notes
    if hd.l1 < 0:
        side = 1.0 if expected > 0 else -1.0
        detail["cycle_side_mu2"] = "above" if side > 0 else "below"
        radii = []
        for dist in distances:
            mu = ParamPoint(m1, hp2.mu2 + side * dist * hp2.norm)
            radii.append(detect_cycle(c, mu).radius)
        slope = float(np.polyfit(np.log(distances), np.log(radii), 1)[0])
        detail["cycle_radii"] = radii
        detail["amplitude_exponent"] = slope
        ok &= abs(slope - 0.5) <= 0.1
        try:
            detect_cycle(c, ParamPoint(m1, hp2.mu2 - side * distances[-1] * hp2.norm))
            detail["cycle_on_wrong_side"] = True
            ok = False
        except NoCycleFound:
            detail["cycle_on_wrong_side"] = False
    return ok, detail


@_timed("transcritical exchange on T1 (Sotomayor quantities)")
def check_sotomayor(n_points: int = 10, s_max: float = 0.05):
    c = PRESETS["I"].coefficients
    case = dispatch_case(c)
    t1 = case.curve(CurveKind.T1)
    c3_expected = 2 * c.D / c.theta
    rows, ok = [], True
    for s in np.linspace(s_max / n_points, s_max, n_points):
        mu = t1.point(float(s))
        chk = sotomayor_T1(c, mu)
        good = (
            abs(chk.lambda2) <= 1e-2 * abs(mu.mu1)
            and abs(chk.C1) <= 1e-4
            and abs(chk.C2 - 1) <= 0.05
            and abs(chk.C3 - c3_expected) <= 0.05 * abs(c3_expected)
        )
        ok &= good
        rows.append({"mu": list(mu), "lambda2": chk.lambda2, "C1": chk.C1, "C2": chk.C2, "C3": chk.C3, "ok": good})
    return ok, {"C3_expected": c3_expected, "points": rows}


@_timed("first-quadrant invariance of integrated orbits")
def check_quadrant(n_orbits: int = 10_000, seed: int = 0, groups: int = 50, t_max: float = 200.0):
    rng = np.random.default_rng(seed + 3)
    per = n_orbits // groups
    worst, count = math.inf, 0
    reasons: dict[str, int] = {}
    for _ in range(groups):
        c = random_coefficients(rng)
        mu = random_mu(rng, 0.05)
        x0 = rng.uniform(0.0, 0.2, (per, 2))
        axis = rng.uniform(size=per)
        x0[axis < 0.05, 0] = 0.0
        x0[(axis >= 0.05) & (axis < 0.1), 1] = 0.0
        for orb in integrate_batch(c, mu, x0, t_max, box=5.0):
            worst = min(worst, float(orb.xi.min()))
            count += 1
            reasons[orb.terminal_reason] = reasons.get(orb.terminal_reason, 0) + 1
    return worst >= -1e-12, {"orbits": count, "min_coordinate": worst, "terminal_reasons": reasons}


@_timed("cubic terms do not change region signatures")
def check_truncation(
    names=("I", "II", "IV", "IX", "X"), n_samples: int = 20, radius: float = 0.05, seed: int = 0
):
    rng = np.random.default_rng(seed + 4)
    detail, ok = {}, True
    for name in names:
        c = PRESETS[name].coefficients
        th, g, de = c.theta, c.gamma, c.delta
        assert th < 0 or 0 < g * de < th or g * de < 0 < th
        secs = sectors(dispatch_case(c))
        diffs = []
        for _ in range(n_samples):
            sec = secs[int(rng.integers(len(secs)))]
            mu, _ = sector_point(c, sec, radius * rng.uniform(0.2, 1.0), rng.uniform(0.2, 0.8))
            full, quad = signature_at(c, mu), signature_at(c.quadratic_part(), mu)
            if full != quad:
                diffs.append({"mu": list(mu), "full": full, "quadratic": quad})
        detail[name] = {"samples": n_samples, "differences": diffs}
        ok &= not diffs
    return ok, detail


ALL_CHECKS = (
    ("oracle", check_oracle),
    ("delta_identity", check_delta_identity),
    ("e3_type", check_e3_type),
    ("tables", check_tables),
    ("slope_chain", check_slope_chain),
    ("hopf", check_hopf),
    ("sotomayor", check_sotomayor),
    ("quadrant", check_quadrant),
    ("truncation", check_truncation),
)


def run_all(seed: int = 0, radius: float = 0.1, progress=None) -> list[CheckResult]:
    results = []
    for key, fn in ALL_CHECKS:
        kw = {}
        if key in ("oracle", "delta_identity", "e3_type", "quadrant", "truncation"):
            kw["seed"] = seed
        if key == "tables":
            kw["radius"] = radius
        res = fn(**kw)
        results.append(res)
        if progress:
            progress(res)
    return results
