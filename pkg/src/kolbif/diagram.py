"""Region decomposition of the parameter disc and phase-portrait signatures.

Every curve of a case leaves the origin along a ray (C4 is tangent to the
negative mu2 axis), so the small disc splits into circular sectors. Each
sector is sampled on its bisector; the bounding angles are those of the
exact curves at the sampling radius, so the sample stays inside the true
region even when two truncated rays are only a degree apart.

A signature is the 4-tuple of table codes for (O, E1, E2, E3), with "-"
for an equilibrium outside the closed first quadrant.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .classify import (
    Classified,
    Kind,
    classify_all,
    discriminant_E3,
    half_trace_E3,
    quantities_from_real_pair,
    classify,
)
from .curves import (
    BifurcationCurve,
    CurveKind,
    DiagramCase,
    exact_T1_point,
    exact_T2_point,
)
from .equilibria import EquilibriumId, all_equilibria, locate_E3
from .errors import KolbifError, NonGenericError, PreconditionError
from .model import DEFAULT_RADIUS, Coefficients, ParamPoint, vector_field
from .plotting import new_figure, save_svg

Signature = tuple[str, str, str, str]

ORDER = (EquilibriumId.O, EquilibriumId.E1, EquilibriumId.E2, EquilibriumId.E3)

# Region types of the 26 generic phase portraits, as (O, E1, E2, E3).
TABLE_COLUMNS: dict[int, Signature] = {
    1: ("s", "un", "-", "-"),
    2: ("un", "-", "-", "-"),
    3: ("s", "-", "un", "-"),
    4: ("s", "-", "s", "un"),
    5: ("sn", "s", "s", "un"),
    6: ("s", "s", "-", "un"),
    7: ("sn", "s", "s", "uf"),
    8: ("sn", "un", "s", "-"),
    9: ("s", "-", "s", "uf"),
    10: ("s", "-", "-", "-"),
    11: ("un", "s", "-", "-"),
    12: ("s", "s", "un", "-"),
    13: ("s", "s", "s", "un"),
    14: ("s", "s", "s", "uf"),
    15: ("s", "s", "s", "sf"),
    16: ("s", "s", "s", "sn"),
    17: ("s", "sn", "s", "-"),
    18: ("sn", "-", "s", "-"),
    19: ("s", "s", "-", "-"),
    20: ("s", "un", "-", "s"),
    21: ("un", "-", "-", "s"),
    22: ("s", "-", "un", "s"),
    23: ("s", "-", "s", "-"),
    24: ("sn", "s", "s", "-"),
    25: ("un", "sn", "-", "s"),
    26: ("s", "sn", "un", "s"),
}

_BY_SIGNATURE = {sig: col for col, sig in TABLE_COLUMNS.items()}

# Which pair collides on each transcritical curve: (survivor, partner that turns virtual).
COLLIDING = {
    CurveKind.T1: (EquilibriumId.E1, EquilibriumId.E3),
    CurveKind.T2: (EquilibriumId.E2, EquilibriumId.E3),
    CurveKind.XPLUS: (EquilibriumId.O, EquilibriumId.E2),
    CurveKind.XMINUS: (EquilibriumId.O, EquilibriumId.E2),
    CurveKind.YPLUS: (EquilibriumId.O, EquilibriumId.E1),
    CurveKind.YMINUS: (EquilibriumId.O, EquilibriumId.E1),
}


def table_column(sig: Signature) -> int | None:
    return _BY_SIGNATURE.get(tuple(sig))


def _status(cl: Classified) -> str:
    if not cl.equilibrium.exists:
        return "?" if cl.equilibrium.id is EquilibriumId.E3 else "-"
    if not cl.equilibrium.in_q1:
        return "-"
    return cl.cls.kind.code


def classified_at(c: Coefficients, mu: ParamPoint) -> dict[EquilibriumId, Classified]:
    return classify_all(c, mu, all_equilibria(c, mu))


def signature_at(c: Coefficients, mu: ParamPoint) -> Signature:
    """Table codes of (O, E1, E2, E3) at mu; "?" marks an indeterminate E3."""
    cls = classified_at(c, mu)
    return tuple(_status(cls[k]) for k in ORDER)


# ---------------------------------------------------------------- exact curve angles


def _e3_quantity(c: Coefficients, mu: ParamPoint, which: str) -> float:
    x1, x2 = locate_E3(c, mu).state
    return half_trace_E3(c, x1, x2) if which == "p" else discriminant_E3(c, x1, x2)


def _norm_root(point_fn, rho: float, scale: float) -> ParamPoint:
    """Point on a parametrized exact curve at distance rho from the origin."""
    hi = 2 * rho / scale
    for _ in range(60):
        if point_fn(hi).norm > rho:
            break
        hi *= 2
    s = brentq(lambda s: point_fn(s).norm - rho, 0.0, hi, xtol=1e-17, rtol=1e-14)
    return point_fn(s)


def exact_curve_angle(
    c: Coefficients, curve: BifurcationCurve, rho: float, bracket: tuple[float, float]
) -> float:
    """Direction of the exact (not truncated) curve where it meets |mu| = rho.

    Axes are exact already. T1 and T2 use their exact parametrizations; the
    node-focus and Hopf curves are zeros of q(E3) or p(E3) on the circle,
    searched inside ``bracket``. Falls back to the truncated angle if the
    search fails.
    """
    kind = curve.kind
    try:
        if kind is CurveKind.T1:
            pt = _norm_root(lambda s: exact_T1_point(c, s), rho, math.hypot(c.theta, c.delta))
        elif kind is CurveKind.T2:
            pt = _norm_root(lambda s: exact_T2_point(c, s), rho, math.hypot(c.gamma, 1.0))
        elif kind in (CurveKind.C1, CurveKind.C2, CurveKind.C3, CurveKind.H):
            which = "p" if kind is CurveKind.H else "q"

            def f(phi):
                return _e3_quantity(c, ParamPoint(rho * math.cos(phi), rho * math.sin(phi)), which)

            phi = brentq(f, bracket[0], bracket[1], xtol=1e-15, rtol=1e-14)
            return phi % (2 * math.pi)
        elif kind is CurveKind.C4:
            pt = exact_C4_point(c, curve, rho)
        else:
            return curve.angle
    except (ValueError, KolbifError):
        return curve.angle
    ang = math.atan2(pt.mu2, pt.mu1) % (2 * math.pi)
    # keep the angle on the same branch as the truncated ray
    return curve.angle + ((ang - curve.angle + math.pi) % (2 * math.pi) - math.pi)


def exact_C4_point(c: Coefficients, curve: BifurcationCurve, mu2_abs: float) -> ParamPoint:
    """Zero of q(E3) on the horizontal line through the parabola at |mu2| = mu2_abs."""
    mu2 = math.copysign(mu2_abs, math.sin(curve.angle))
    guess = curve.curvature * mu2**2
    mu1 = brentq(
        lambda m1: _e3_quantity(c, ParamPoint(m1, mu2), "q"),
        0.0,
        3 * guess,
        xtol=1e-18,
        rtol=1e-14,
    )
    return ParamPoint(mu1, mu2)


# ---------------------------------------------------------------- regions


@dataclass
class Region:
    index: int | None
    sample: ParamPoint
    signature: Signature
    bounds: tuple[str, str]
    clearance: float
    resamples: list[tuple[ParamPoint, Signature]] = field(default_factory=list)

    @property
    def constant(self) -> bool:
        return all(sig == self.signature for _, sig in self.resamples)

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "sample": [self.sample.mu1, self.sample.mu2],
            "signature": list(self.signature),
            "bounds": list(self.bounds),
            "clearance": self.clearance,
            "constant": self.constant,
        }


@dataclass
class Sector:
    lo: BifurcationCurve
    hi: BifurcationCurve
    lo_angle: float
    hi_angle: float  # may exceed 2*pi when the sector wraps
    lo_bracket: tuple[float, float]
    hi_bracket: tuple[float, float]
    thin_c4: BifurcationCurve | None = None  # region between Y- and the parabola


def _brackets(rays: list[BifurcationCurve]) -> list[tuple[float, float]]:
    n = len(rays)
    out = []
    for i, cv in enumerate(rays):
        prev = rays[i - 1].angle - (2 * math.pi if i == 0 else 0.0)
        nxt = rays[(i + 1) % n].angle + (2 * math.pi if i == n - 1 else 0.0)
        out.append((0.5 * (prev + cv.angle), 0.5 * (cv.angle + nxt)))
    return out


def sectors(case: DiagramCase) -> list[Sector]:
    rays = sorted((cv for cv in case.curves if cv.is_ray), key=lambda cv: cv.angle)
    for a, b in zip(rays, rays[1:] + rays[:1]):
        gap = (b.angle - a.angle) % (2 * math.pi)
        if gap < 1e-9 or gap > 2 * math.pi - 1e-9:
            raise NonGenericError(f"curves {a.kind.value} and {b.kind.value} share a direction")
    brk = _brackets(rays)
    n = len(rays)
    sectors = []
    for i in range(n):
        j = (i + 1) % n
        hi_angle = rays[j].angle + (2 * math.pi if j == 0 else 0.0)
        hb = brk[j] if j != 0 else (brk[j][0] + 2 * math.pi, brk[j][1] + 2 * math.pi)
        sectors.append(Sector(rays[i], rays[j], rays[i].angle, hi_angle, brk[i], hb))
    parabolas = [cv for cv in case.curves if not cv.is_ray]
    for par in parabolas:
        out = []
        for sec in sectors:
            touches_lo = sec.lo.kind.value[0] == "Y" and abs(sec.lo_angle - par.angle) < 1e-12
            touches_hi = sec.hi.kind.value[0] == "Y" and abs(sec.hi_angle % (2 * math.pi) - par.angle) < 1e-12
            # mu1 > 0 side of Y- lies counter-clockwise from it
            if touches_lo and _ccw_side(par):
                out.append(Sector(sec.lo, par, sec.lo_angle, sec.lo_angle, sec.lo_bracket, sec.lo_bracket, par))
                out.append(Sector(par, sec.hi, sec.lo_angle, sec.hi_angle, sec.lo_bracket, sec.hi_bracket))
            elif touches_hi and not _ccw_side(par):
                out.append(Sector(sec.lo, par, sec.lo_angle, sec.hi_angle, sec.lo_bracket, sec.hi_bracket))
                out.append(Sector(par, sec.hi, sec.hi_angle, sec.hi_angle, sec.hi_bracket, sec.hi_bracket, par))
            else:
                out.append(sec)
        sectors = out
    return sectors


def _ccw_side(par: BifurcationCurve) -> bool:
    """Does the parabola lie counter-clockwise of its tangent ray?"""
    return (par.side > 0) == (math.sin(par.angle) < 0)


def sector_point(c: Coefficients, sec: Sector, rho: float, frac: float) -> tuple[ParamPoint, float]:
    """Point at radius rho a fraction frac of the way across the exact sector; also its clearance."""
    if sec.thin_c4 is not None:
        edge = exact_C4_point(c, sec.thin_c4, rho)
        mu1 = frac * edge.mu1
        return ParamPoint(mu1, edge.mu2), min(abs(mu1), abs(edge.mu1 - mu1))
    lo = exact_curve_angle(c, sec.lo, rho, sec.lo_bracket)
    hi = exact_curve_angle(c, sec.hi, rho, sec.hi_bracket)
    while hi <= lo:
        hi += 2 * math.pi
    phi = lo + frac * (hi - lo)
    half = min(phi - lo, hi - phi)
    clearance = rho * (math.sin(half) if half < math.pi / 2 else 1.0)
    return ParamPoint(rho * math.cos(phi), rho * math.sin(phi)), clearance


RESAMPLES = ((0.25, 0.5), (0.5, 0.25), (0.5, 0.75))


def enumerate_regions(
    case: DiagramCase, radius: float = DEFAULT_RADIUS, eps_param: float = DEFAULT_RADIUS
) -> list[Region]:
    """One sampled region per sector of the disc of the given radius."""
    if radius > eps_param:
        raise PreconditionError(f"radius {radius:g} exceeds the analysis radius {eps_param:g}")
    c = case.coefficients
    regions = []
    for sec in sectors(case):
        sample, clearance = sector_point(c, sec, 0.5 * radius, 0.5)
        sig = signature_at(c, sample)
        extra = []
        for rfrac, afrac in RESAMPLES:
            pt, _ = sector_point(c, sec, rfrac * radius, afrac)
            extra.append((pt, signature_at(c, pt)))
        regions.append(
            Region(
                table_column(sig),
                sample,
                sig,
                (sec.lo.kind.value, sec.hi.kind.value),
                clearance,
                extra,
            )
        )
    return regions


# ---------------------------------------------------------------- on-curve signatures


@dataclass
class CurveSignature:
    kind: str
    sample: ParamPoint
    signature: Signature
    note: str
    expected: Signature | None = None

    @property
    def virtual_side_ok(self) -> bool | None:
        return None if self.expected is None else self.signature == self.expected

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "sample": [self.sample.mu1, self.sample.mu2],
            "signature": list(self.signature),
            "note": self.note,
            "virtual_side_ok": self.virtual_side_ok,
        }


def _exact_curve_point(c: Coefficients, curve: BifurcationCurve, rho: float) -> ParamPoint:
    if curve.kind is CurveKind.T1:
        return _norm_root(lambda s: exact_T1_point(c, s), rho, math.hypot(c.theta, c.delta))
    if curve.kind is CurveKind.T2:
        return _norm_root(lambda s: exact_T2_point(c, s), rho, math.hypot(c.gamma, 1.0))
    return curve.point(rho)


def merged_survivor_code(c: Coefficients, mu: ParamPoint, survivor: Classified) -> str:
    """Type of a collided equilibrium as seen from inside Q1.

    Its zero eigenvalue is replaced by the sign of the drift along the center
    direction, taken on the side pointing into the open quadrant.
    """
    e = survivor.equilibrium.state.as_array()
    jac = np.empty((2, 2))
    h = 1e-7
    for j in range(2):
        step = np.zeros(2)
        step[j] = h
        jac[:, j] = (np.array(vector_field(c, mu, e + step)) - np.array(vector_field(c, mu, e - step))) / (2 * h)
    vals, vecs = np.linalg.eig(jac)
    vals = np.real(vals)
    k = int(np.argmin(np.abs(vals)))
    v = np.real(vecs[:, k])
    zero_coords = [i for i in range(2) if e[i] == 0.0]
    if sum(v[i] for i in zero_coords) < 0:
        v = -v
    lvals, lvecs = np.linalg.eig(jac.T)
    w = np.real(lvecs[:, int(np.argmin(np.abs(np.real(lvals) - vals[k])))])
    w = w / (w @ v)
    u = 1e-4 * max(np.max(np.abs(e)), 1e-3)
    drift = w @ np.array(vector_field(c, mu, e + u * v))
    other = vals[1 - k]
    pq = quantities_from_real_pair(c, other, math.copysign(1.0, drift) * abs(other))
    return classify(pq).kind.code


def curve_signature(c: Coefficients, curve: BifurcationCurve, rho: float) -> CurveSignature:
    mu = _exact_curve_point(c, curve, rho)
    cls = classified_at(c, mu)
    codes = {k: _status(cls[k]) for k in ORDER}
    note = curve.kind.family
    if curve.kind in COLLIDING:
        survivor, partner = COLLIDING[curve.kind]
        codes[partner] = "-"
        codes[survivor] = merged_survivor_code(c, mu, cls[survivor])
        note = f"{survivor.value}={partner.value} merged; {partner.value} taken as virtual"
    elif curve.kind is CurveKind.H:
        e3 = cls[EquilibriumId.E3]
        if e3.cls is not None and e3.cls.kind is Kind.CENTER_CANDIDATE:
            codes[EquilibriumId.E3] = "c"
        note = "E3 has purely imaginary eigenvalues"
    else:
        note = "E3 has a double eigenvalue (node-focus boundary)"
    return CurveSignature(curve.kind.value, mu, tuple(codes[k] for k in ORDER), note)


def _adjacent_virtual(curve: BifurcationCurve, regions: list[Region]) -> Signature | None:
    """Signature of the neighbouring region in which the partner equilibrium is virtual."""
    _, partner = COLLIDING[curve.kind]
    idx = ORDER.index(partner)
    for r in regions:
        if curve.kind.value in r.bounds and r.signature[idx] == "-":
            return r.signature
    return None


# ---------------------------------------------------------------- report


@dataclass
class DiagramReport:
    case: DiagramCase
    regions: list[Region]
    curve_signatures: list[CurveSignature]
    unmatched: list[Signature]
    radius: float

    def as_dict(self) -> dict:
        return {
            "case": self.case.id.value,
            "coefficients": self.case.coefficients.as_dict(),
            "conditions": self.case.case_conditions,
            "radius": self.radius,
            "curves": [
                {
                    "kind": cv.kind.value,
                    "family": cv.kind.family,
                    "slope": cv.slope,
                    "angle_deg": math.degrees(cv.angle),
                    "halfplane": cv.halfplane,
                }
                for cv in self.case.curves
            ],
            "regions": [r.as_dict() for r in self.regions],
            "curve_signatures": [s.as_dict() for s in self.curve_signatures],
            "unmatched": [list(s) for s in self.unmatched],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)

    def regions_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "mu1", "mu2", "O", "E1", "E2", "E3", "bound_lo", "bound_hi"])
        for r in self.regions:
            w.writerow(["" if r.index is None else r.index, repr(r.sample.mu1), repr(r.sample.mu2), *r.signature, *r.bounds])
        return buf.getvalue()


def build_report(
    case: DiagramCase, radius: float = DEFAULT_RADIUS, eps_param: float = DEFAULT_RADIUS
) -> DiagramReport:
    regions = enumerate_regions(case, radius, eps_param)
    c = case.coefficients
    sigs = []
    for cv in case.curves:
        cs = curve_signature(c, cv, 0.5 * radius)
        if cv.kind in COLLIDING:
            cs.expected = _adjacent_virtual(cv, regions)
        sigs.append(cs)
    unmatched = [r.signature for r in regions if r.index is None]
    return DiagramReport(case, regions, sigs, unmatched, radius)


@dataclass
class TableCheck:
    passed: bool
    matched: set[int]
    problems: list[str]


def verify_tables(report: DiagramReport) -> TableCheck:
    """Every region must match a table column and keep its signature at the resamples."""
    c = report.case.coefficients
    problems = []
    for r in report.regions:
        if r.index is None:
            cls = classified_at(c, r.sample)
            eig = {
                k.value: [complex(z) for z in cls[k].eigen.sorted()] if cls[k].eigen else None
                for k in ORDER
            }
            problems.append(f"unmatched signature {r.signature} at mu={tuple(r.sample)}; eigenvalues {eig}")
        if not r.constant:
            bad = [(tuple(pt), sig) for pt, sig in r.resamples if sig != r.signature]
            problems.append(f"region {r.index} at {tuple(r.sample)} not constant: {bad}")
    for cs in report.curve_signatures:
        if cs.virtual_side_ok is False:
            problems.append(
                f"on {cs.kind} signature {cs.signature} differs from adjacent region {cs.expected}"
            )
    matched = {r.index for r in report.regions if r.index is not None}
    return TableCheck(not problems, matched, problems)


# ---------------------------------------------------------------- rendering


def _draw_curves(ax, curves: list[BifurcationCurve], r: float) -> None:
    t = np.linspace(0, 2 * np.pi, 361)
    ax.plot(r * np.cos(t), r * np.sin(t), color="0.7", linewidth=0.8)
    for cv in curves:
        pts = cv.points(r, 60)
        xs = [p.mu1 for _, p in pts]
        ys = [p.mu2 for _, p in pts]
        style = "-" if cv.kind.family != "axis" else ":"
        ax.plot(xs, ys, style, color="black" if cv.kind.family == "axis" else None, linewidth=1.2)
        if pts:
            end = pts[-1][1]
            ax.annotate(cv.kind.value, (end.mu1, end.mu2), fontsize=8, xytext=(3, 3), textcoords="offset points")
    ax.set_aspect("equal")
    ax.set_xlim(-1.15 * r, 1.15 * r)
    ax.set_ylim(-1.15 * r, 1.15 * r)
    ax.set_xlabel("mu1")
    ax.set_ylabel("mu2")


def render_curves(case: DiagramCase, radius: float, path: str | Path) -> Path:
    fig, ax = new_figure()
    _draw_curves(ax, case.curves, radius)
    ax.set_title(f"Case {case.id.value}: bifurcation curves")
    return save_svg(fig, path)


def render_diagram(report: DiagramReport, path: str | Path) -> Path:
    fig, ax = new_figure()
    _draw_curves(ax, report.case.curves, report.radius)
    for reg in report.regions:
        ax.plot([reg.sample.mu1], [reg.sample.mu2], ".", color="tab:gray")
        label = str(reg.index) if reg.index is not None else "?"
        ax.annotate(label, (reg.sample.mu1, reg.sample.mu2), fontsize=9, xytext=(2, -10), textcoords="offset points")
    ax.set_title(f"Case {report.case.id.value}")
    return save_svg(fig, path)
