"""Bifurcation curves in the parameter plane and the case dispatch.

All curves through the origin are emitted at lowest order: straight rays,
plus one parabola (C4) in the a = 0 cases. The discriminant of
q = p^2 - L at lowest order is the binary quadratic form

    G0(mu1, mu2) = a*mu2**2 - 2*b*mu1*mu2 + c*mu1**2

(up to the positive factor 1/(4 D^2)), whose zero lines are C1 and C2.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .classify import half_trace_E3
from .equilibria import e3_seed, locate_E1, locate_E3
from .errors import (
    DegenerateCoefficientsError,
    EquilibriumError,
    PreconditionError,
    UnsupportedCaseError,
)
from .model import Coefficients, ParamPoint, vector_field


class CurveKind(str, enum.Enum):
    T1 = "T1"
    T2 = "T2"
    XPLUS = "Xplus"
    XMINUS = "Xminus"
    YPLUS = "Yplus"
    YMINUS = "Yminus"
    C1 = "C1"
    C2 = "C2"
    C3 = "C3"
    C4 = "C4"
    H = "H"

    @property
    def family(self) -> str:
        if self in (CurveKind.T1, CurveKind.T2):
            return "transcritical"
        if self is CurveKind.H:
            return "hopf"
        if self in (CurveKind.C1, CurveKind.C2, CurveKind.C3, CurveKind.C4):
            return "node-focus"
        return "axis"


class CaseId(str, enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"
    Va = "Va"
    Vb = "Vb"
    VIa = "VIa"
    VIb = "VIb"
    VII = "VII"
    VIII = "VIII"
    IX = "IX"
    X = "X"


# ---------------------------------------------------------------- quadratic form


@dataclass(frozen=True)
class QuadraticFormCoeffs:
    a: float
    b: float
    c: float
    Delta: float
    e1: float | None = None
    e2: float | None = None


def delta_closed_form(c: Coefficients) -> float:
    """-4*gamma*delta*(theta - gamma*delta)**3, the factored discriminant."""
    return -4 * c.gamma * c.delta * c.D**3


def quad_coeffs(c: Coefficients, rtol: float = 1e-10) -> QuadraticFormCoeffs:
    """a, b, c of the lowest-order form, its discriminant and real zero slopes.

    a, b, c and b^2 - ac are evaluated in exact rational arithmetic on the
    float inputs, so the discriminant carries no cancellation error even
    when b^2 and ac nearly agree. The result is then checked against the
    factored closed form.
    """
    th, g, d = Fraction(c.theta), Fraction(c.gamma), Fraction(c.delta)
    a = th**2 * (g + 1) ** 2 - 4 * th * g**2 * d
    b = -2 * d**2 * g**2 + th * (th - d) * g + th * (th + d)
    cc = (th + d) ** 2 - 4 * g * d**2
    disc = b * b - a * cc
    closed = -4 * g * d * (th - g * d) ** 3
    if abs(disc - closed) > rtol * max(abs(disc), abs(closed)):
        raise AssertionError(f"b^2 - ac = {float(disc)!r} disagrees with {float(closed)!r}")
    fa, fb, fc, fdisc = float(a), float(b), float(cc), float(disc)
    e1 = e2 = None
    if fdisc > 0 and fa != 0:
        root = math.sqrt(fdisc)
        big = fb + math.copysign(root, fb)
        r1, r2 = big / fa, fc / big
        e1, e2 = min(r1, r2), max(r1, r2)
    return QuadraticFormCoeffs(fa, fb, fc, fdisc, e1, e2)


TOL_A = 1e-9


def a_zero_tolerance(c: Coefficients, tol_a: float = TOL_A) -> float:
    return tol_a * max(1.0, c.theta**2, (c.gamma * c.delta) ** 2)


def a_is_zero(c: Coefficients, qc: QuadraticFormCoeffs | None = None, tol_a: float = TOL_A) -> bool:
    qc = qc or quad_coeffs(c)
    return abs(qc.a) <= a_zero_tolerance(c, tol_a)


@dataclass(frozen=True)
class CubicCaseCoeffs:
    """Coefficients of q ~ scale*(c*mu1^2 - 2*b*mu1*mu2 + d*mu2^3) when a = 0.

    ``c3_d`` is the cubic coefficient obtained by expanding q along E3 to
    third order. ``d_tabulated`` with its inner coefficients ``d31, d21,
    d11`` is a reference expression reported alongside for comparison; it
    agrees with ``c3_d`` in the S and P terms only.
    """

    c3_c: float
    c3_b: float
    c3_d: float
    d31: float
    d21: float
    d11: float
    d_tabulated: float
    scale: float


def cubic_case_coeffs(c: Coefficients) -> CubicCaseCoeffs:
    g, de = c.gamma, c.delta
    M, N, S, P = c.M, c.N, c.S, c.P
    if g == -1:
        raise PreconditionError("gamma = -1 makes a = -4*theta*delta nonzero")
    c3_c = (4 * g**2 + 3 * g + 1) / (4 * g**2 * (1 - g))
    c3_b = -(g + 1) / (2 * (g - 1))
    inner = (
        (8 * S - 3 * N) * g**5
        + (8 * M * de - 13 * N + 24 * S) * g**4
        + (24 * M * de - 22 * N + 64 * P * de**2 + 24 * S) * g**3
        + (24 * M * de - 18 * N + 8 * S) * g**2
        + (8 * M * de - 7 * N) * g
        - N
    )
    pre = (g + 1) / (de**2 * (g - 1) ** 6)
    d31 = 6 * S - 4 * N + 3 * M * de
    d21 = 16 * P * de**2 + 7 * M * de - 6 * N + 6 * S
    d11 = 2 * S - 4 * N + 5 * M * de
    tab = 4 * g * pre * ((2 * S - N) * g**4 + d31 * g**3 + d21 * g**2 + d11 * g + M * de - N)
    k = 4 * de**2 * g**2 * (1 - g) ** 4 / (1 + g) ** 4
    return CubicCaseCoeffs(c3_c, c3_b, pre * inner, d31, d21, d11, tab, k / (4 * c.D**2))


# ---------------------------------------------------------------- curve objects


@dataclass(frozen=True)
class BifurcationCurve:
    """One bifurcation curve, restricted to its admissible branch.

    ``param_fn(s)`` for s >= 0 walks the branch away from the origin; for
    rays s is arclength. ``angle`` is the direction of the branch at the
    origin in [0, 2*pi). For the parabola, ``side`` is the sign of mu1 on
    it (the angle is that of its tangent ray).
    """

    kind: CurveKind
    param_fn: Callable[[float], ParamPoint]
    slope: float | None
    halfplane: str
    angle: float
    side: int = 0
    omega: float | None = None
    curvature: float | None = None

    def point(self, s: float) -> ParamPoint:
        return self.param_fn(s)

    def points(self, radius: float, n: int = 50) -> list[tuple[float, ParamPoint]]:
        out = []
        for s in np.linspace(0.0, radius, n):
            pt = self.param_fn(float(s))
            if pt.norm <= radius * (1 + 1e-12):
                out.append((float(s), pt))
        return out

    @property
    def is_ray(self) -> bool:
        return self.curvature is None


def _angle(v1: float, v2: float) -> float:
    return math.atan2(v2, v1) % (2 * math.pi)


def _ray(kind, v1, v2, slope, halfplane, **extra) -> BifurcationCurve:
    n = math.hypot(v1, v2)
    u1, u2 = v1 / n, v2 / n
    return BifurcationCurve(
        kind, lambda s: ParamPoint(s * u1, s * u2), slope, halfplane, _angle(u1, u2), **extra
    )


def _e3_positive(c: Coefficients, v1: float, v2: float) -> bool:
    x1, x2 = e3_seed(c, ParamPoint(v1, v2))
    return x1 > 0 and x2 > 0


def _admissible_ray(c: Coefficients, kind, v1, v2, slope) -> BifurcationCurve | None:
    """Pick the half of a line through O along which E3 lies in Q1 at lowest order."""
    for sgn in (1.0, -1.0):
        if _e3_positive(c, sgn * v1, sgn * v2):
            return _ray(kind, sgn * v1, sgn * v2, slope, "E3 in Q1")
    return None


def curve_T1(c: Coefficients) -> BifurcationCurve:
    if c.theta == 0:
        raise DegenerateCoefficientsError("T1 requires theta != 0")
    sgn = math.copysign(1.0, c.theta)
    return _ray(CurveKind.T1, sgn, sgn * c.delta / c.theta, c.delta / c.theta, "mu1/theta > 0")


def curve_T2(c: Coefficients) -> BifurcationCurve:
    if c.gamma == 0:
        raise DegenerateCoefficientsError("T2 requires gamma != 0")
    return _ray(CurveKind.T2, 1.0, 1.0 / c.gamma, 1.0 / c.gamma, "mu1 > 0")


def half_axes() -> list[BifurcationCurve]:
    return [
        _ray(CurveKind.XPLUS, 1.0, 0.0, 0.0, "mu1 > 0"),
        _ray(CurveKind.YPLUS, 0.0, 1.0, None, "mu2 > 0"),
        _ray(CurveKind.XMINUS, -1.0, 0.0, 0.0, "mu1 < 0"),
        _ray(CurveKind.YMINUS, 0.0, -1.0, None, "mu2 < 0"),
    ]


def curves_C12(
    qc: QuadraticFormCoeffs, c: Coefficients | None = None
) -> tuple[BifurcationCurve, BifurcationCurve] | None:
    """The zero lines mu2 = e1*mu1 and mu2 = e2*mu1 of the form, or None.

    Given the coefficients, each line is cut down to its half where E3 lies
    in Q1; otherwise the mu1 > 0 half is returned.
    """
    if qc.e1 is None or qc.e2 is None:
        return None
    out = []
    for kind, e in ((CurveKind.C1, qc.e1), (CurveKind.C2, qc.e2)):
        curve = _admissible_ray(c, kind, 1.0, e, e) if c is not None else None
        out.append(curve or _ray(kind, 1.0, e, e, "mu1 > 0"))
    return out[0], out[1]


def node_focus_admissibility(c: Coefficients, qc: QuadraticFormCoeffs | None = None) -> dict[str, bool]:
    """Whether each real zero line of the form has a half with E3 in Q1."""
    qc = qc or quad_coeffs(c)
    if qc.e1 is None or qc.e2 is None:
        return {}
    return {
        kind.value: _admissible_ray(c, kind, 1.0, e, e) is not None
        for kind, e in ((CurveKind.C1, qc.e1), (CurveKind.C2, qc.e2))
    }


def curves_C34(
    c: Coefficients, qc: QuadraticFormCoeffs | None = None
) -> tuple[BifurcationCurve, BifurcationCurve, CubicCaseCoeffs]:
    qc = qc or quad_coeffs(c)
    if not a_is_zero(c, qc):
        raise PreconditionError(f"C3/C4 need a = 0, got a = {qc.a:g}")
    cc = cubic_case_coeffs(c)
    if cc.c3_d == 0:
        raise UnsupportedCaseError(
            "a = 0 and d = 0: the cubic term does not decide the sign of q; "
            "further analysis required"
        )
    # C3: mu1 = (2b/c) mu2
    r = 2 * cc.c3_b / cc.c3_c
    c3 = _admissible_ray(c, CurveKind.C3, r, 1.0, 1.0 / r if r != 0 else None)
    if c3 is None:
        raise PreconditionError("C3 has no branch with E3 in Q1")
    # C4: mu1 = k mu2^2, on the branch of mu2 where E3 lies in Q1
    k = -cc.c3_d * (c.gamma - 1) / (c.gamma + 1)
    branch = -1.0 if _e3_positive(c, 0.0, -1.0) else 1.0

    def c4(s: float, k=k, branch=branch) -> ParamPoint:
        return ParamPoint(k * s * s, branch * s)

    c4_curve = BifurcationCurve(
        CurveKind.C4,
        c4,
        None,
        "mu2 < 0" if branch < 0 else "mu2 > 0",
        _angle(0.0, branch),
        side=int(math.copysign(1, k)),
        curvature=k,
    )
    return c3, c4_curve, cc


def curve_H(c: Coefficients) -> BifurcationCurve | None:
    """Lowest-order Hopf line p = 0 for mu1 > 0; present iff 0 < theta < gamma*delta."""
    th, g, d = c.theta, c.gamma, c.delta
    if not (0 < th < g * d) or th == d:
        return None
    m = (th - d) / (th * (g - 1))
    omega = math.sqrt((g * d - th) * th) / (th * (1 - g))
    return _ray(CurveKind.H, 1.0, m, m, "mu1 > 0", omega=omega)


# ---------------------------------------------------------------- exact points


def exact_T1_point(c: Coefficients, xi1: float) -> ParamPoint:
    """The parameter at which E3 coincides with E1 = (xi1, 0)."""
    return ParamPoint(c.theta * xi1 - c.N * xi1**2, c.delta * xi1 - c.S * xi1**2)


def exact_T2_point(c: Coefficients, xi2: float) -> ParamPoint:
    """The parameter at which E3 coincides with E2 = (0, xi2)."""
    return ParamPoint(-c.gamma * xi2, -xi2 - c.P * xi2**2)


def hopf_point(c: Coefficients, mu1: float, rel_bracket: float = 0.5) -> ParamPoint:
    """Refine the Hopf line: mu2 with p(E3) = 0 exactly at the given mu1."""
    h = curve_H(c)
    if h is None:
        raise PreconditionError("no Hopf curve for these coefficients")
    m = h.slope
    mu2_0 = m * mu1

    def p_at(mu2):
        e = locate_E3(c, ParamPoint(mu1, mu2))
        return half_trace_E3(c, *e.state)

    width = 0.02 * abs(mu1) * max(abs(m), 1.0)
    while True:
        lo, hi = mu2_0 - width, mu2_0 + width
        try:
            if p_at(lo) * p_at(hi) < 0:
                break
        except EquilibriumError:
            pass
        width *= 2
        if width > rel_bracket * abs(mu1) * max(abs(m), 1.0):
            raise PreconditionError("p(E3) does not change sign near the Hopf line")
    mu2 = brentq(p_at, lo, hi, xtol=1e-16, rtol=1e-15, maxiter=200)
    return ParamPoint(mu1, mu2)


# ---------------------------------------------------------------- slopes


@dataclass(frozen=True)
class SlopeOrdering:
    m_T1: float | None
    m_T2: float | None
    m_C1: float | None
    m_C2: float | None
    m_H: float | None
    P1: float
    S1: float
    P2: float
    S2: float
    order: list[tuple[str, float]] = field(default_factory=list)


def slope_ordering(c: Coefficients, qc: QuadraticFormCoeffs | None = None) -> SlopeOrdering:
    """Slopes of T1, C1, H, C2, T2 and the product/sum of the C-slopes relative to T2, T1.

    P1, S1 are the product and sum of e_i - 1/gamma; P2, S2 those of
    e_i - delta/theta. Their signs place C1, C2 relative to T2 and T1.
    """
    qc = qc or quad_coeffs(c)
    th, g, d, D, a = c.theta, c.gamma, c.delta, c.D, qc.a
    if a == 0:
        raise PreconditionError("slope products are undefined for a = 0")
    P1 = D**2 / (g**2 * a)
    S1 = -4 * D * th / a * ((g + 1) / (2 * g) - g * d / th)
    P2 = D**2 / a
    S2 = 4 * D * th * g / a * ((g + 1) / (2 * g) - d / th)
    h = curve_H(c)
    slopes = {
        "T1": d / th,
        "T2": 1 / g,
        "C1": qc.e1,
        "C2": qc.e2,
        "H": h.slope if h is not None else None,
    }
    order = sorted(((k, v) for k, v in slopes.items() if v is not None), key=lambda kv: kv[1])
    so = SlopeOrdering(
        slopes["T1"], slopes["T2"], slopes["C1"], slopes["C2"], slopes["H"], P1, S1, P2, S2, order
    )
    if D < 0 and d < 0 and th > 0 and None not in slopes.values():
        names = [k for k, _ in order]
        if names != ["T1", "C1", "H", "C2", "T2"] or order[-1][1] >= 0:
            raise AssertionError(f"unexpected slope chain {order}")
    return so


# ---------------------------------------------------------------- dispatch


@dataclass(frozen=True)
class DiagramCase:
    id: CaseId
    coefficients: Coefficients
    curves: list[BifurcationCurve]
    case_conditions: dict[str, float]

    def curve(self, kind: CurveKind | str) -> BifurcationCurve:
        kind = CurveKind(kind)
        for cv in self.curves:
            if cv.kind is kind:
                return cv
        raise KeyError(kind)


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def dispatch_case(c: Coefficients, tol_a: float = TOL_A) -> DiagramCase:
    """Select the diagram case from the signs of D, delta, theta, a and d."""
    c.validate()
    qc = quad_coeffs(c)
    th, g, d, D = c.theta, c.gamma, c.delta, c.D
    cond: dict[str, float] = {
        "theta_minus_gamma_delta": D,
        "delta": d,
        "theta": th,
        "gamma": g,
        "a": qc.a,
        "b": qc.b,
        "c": qc.c,
        "Delta": qc.Delta,
    }
    curves = half_axes() + [curve_T1(c), curve_T2(c)]
    if D > 0:
        cid = CaseId.X if d < 0 else (CaseId.IX if th > 0 else CaseId.VIII)
    elif d > 0:
        cid = CaseId.I
    elif th > 0:
        cid = CaseId.VII
        c12 = curves_C12(qc, c)
        curves += [c12[0], curve_H(c), c12[1]]
    elif a_is_zero(c, qc, tol_a):
        c3, c4, cc = curves_C34(c, qc)
        cond["d"] = cc.c3_d
        cond["d_tabulated"] = cc.d_tabulated
        if g < -1:
            cid = CaseId.Va if cc.c3_d < 0 else CaseId.Vb
        else:
            cid = CaseId.VIa if cc.c3_d > 0 else CaseId.VIb
        curves += [c3, c4]
    else:
        if abs(qc.a) <= 1e3 * a_zero_tolerance(c, tol_a):
            warnings.warn(
                f"a = {qc.a:.3g} is close to zero; treated as nonzero", RuntimeWarning, stacklevel=2
            )
        if qc.a > 0:
            cid = CaseId.II if g > -1 else CaseId.III
        else:
            cid = CaseId.IV
        c12 = curves_C12(qc, c)
        if c12 is None:
            raise PreconditionError("expected two real node-focus lines")
        curves += list(c12)
    return DiagramCase(cid, c, curves, cond)


# ---------------------------------------------------------------- numerical checks


@dataclass(frozen=True)
class SotomayorCheck:
    mu: ParamPoint
    lambda2: float
    C1: float
    C2: float
    C3: float


def sotomayor_T1(c: Coefficients, mu: ParamPoint, eps: float = 1e-4, h: float = 1e-4) -> SotomayorCheck:
    """Finite-difference transversality quantities for the E1/E3 exchange.

    Uses the Jacobian at E1 by central differences, its near-zero eigenvalue
    with right eigenvector v (second component 1) and left eigenvector w
    (w.v = 1), and directional differences of the field along v.
    """
    e1 = locate_E1(c, mu).state.as_array()

    def f(x, m=mu):
        return np.array(vector_field(c, m, x))

    jac = np.empty((2, 2))
    for j in range(2):
        step = np.zeros(2)
        step[j] = eps
        jac[:, j] = (f(e1 + step) - f(e1 - step)) / (2 * eps)
    vals, vecs = np.linalg.eig(jac)
    k = int(np.argmin(np.abs(vals)))
    v = np.real(vecs[:, k])
    v = v / v[1]
    lvals, lvecs = np.linalg.eig(jac.T)
    w = np.real(lvecs[:, int(np.argmin(np.abs(lvals - vals[k])))])
    w = w / (w @ v)
    up, dn = ParamPoint(mu.mu1, mu.mu2 + h), ParamPoint(mu.mu1, mu.mu2 - h)
    c1 = w @ (f(e1, up) - f(e1, dn)) / (2 * h)
    mixed = f(e1 + eps * v, up) - f(e1 - eps * v, up) - f(e1 + eps * v, dn) + f(e1 - eps * v, dn)
    c2 = w @ mixed / (4 * eps * h)
    c3 = w @ (f(e1 + eps * v) - 2 * f(e1) + f(e1 - eps * v)) / eps**2
    return SotomayorCheck(mu, float(np.real(vals[k])), float(c1), float(c2), float(c3))


def hopf_transversality(c: Coefficients, mu1: float, h: float | None = None) -> float:
    """d p(E3) / d mu2 across the exact Hopf point at this mu1 (central difference)."""
    hp = hopf_point(c, mu1)
    h = h if h is not None else 1e-3 * abs(mu1)

    def p_at(mu2):
        e = locate_E3(c, ParamPoint(mu1, mu2))
        return half_trace_E3(c, *e.state)

    return (p_at(hp.mu2 + h) - p_at(hp.mu2 - h)) / (2 * h)


def hopf_transversality_expected(c: Coefficients) -> float:
    return (c.gamma - 1) * c.theta / (2 * c.D)


def curves_csv(curves: list[BifurcationCurve], radius: float, n: int = 50) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "s", "mu1", "mu2"])
    for cv in curves:
        for s, pt in cv.points(radius, n):
            writer.writerow([cv.kind.value, repr(s), repr(pt.mu1), repr(pt.mu2)])
    return buf.getvalue()

