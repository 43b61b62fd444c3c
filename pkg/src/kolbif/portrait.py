"""Phase portraits, the first Lyapunov coefficient, and limit-cycle detection."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import contourpy
import numpy as np
from scipy.optimize import brentq

from .classify import Classified, classify_all, half_trace_E3, discriminant_E3
from .equilibria import EquilibriumId, all_equilibria, locate_E3
from .errors import DegenerateHopfError, EquilibriumError, IntegrationError, NoCycleFound, PreconditionError
from .integrate import ATOL, RTOL, Orbit, flow_to_section, integrate, integrate_batch
from .model import Coefficients, ParamPoint, State, growth_rates, hessian, jacobian, third_derivative
from .plotting import mark_equilibrium, new_figure, save_svg

__all__ = [
    "HopfData",
    "Orbit",
    "Portrait",
    "detect_cycle",
    "integrate",
    "integrate_batch",
    "first_lyapunov_coefficient",
    "lyapunov_l1",
    "phase_portrait",
    "render_portrait",
]


# ---------------------------------------------------------------- portraits


@dataclass
class Portrait:
    c: Coefficients
    mu: ParamPoint
    window: tuple[float, float]
    orbits: list[Orbit]
    nullclines: dict[str, list[np.ndarray]]
    equilibria: dict[EquilibriumId, Classified]

    def orbits_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["orbit", "t", "xi1", "xi2"])
        for k, orb in enumerate(self.orbits):
            for t, a, b in orb.to_csv_rows():
                w.writerow([k, repr(t), repr(a), repr(b)])
        return buf.getvalue()

    def summary(self) -> dict:
        eqs = {}
        for tag, cl in self.equilibria.items():
            e = cl.equilibrium
            eqs[tag.value] = {
                "state": [e.state.xi1, e.state.xi2] if e.exists else None,
                "in_q1": e.in_q1,
                "type": cl.cls.kind.value if cl.cls else None,
            }
        reasons: dict[str, int] = {}
        for orb in self.orbits:
            reasons[orb.terminal_reason] = reasons.get(orb.terminal_reason, 0) + 1
        return {
            "coefficients": self.c.as_dict(),
            "mu": [self.mu.mu1, self.mu.mu2],
            "window": list(self.window),
            "equilibria": eqs,
            "orbits": len(self.orbits),
            "terminal_reasons": reasons,
        }


def default_window(c: Coefficients, mu: ParamPoint) -> tuple[float, float]:
    """A Q1 box a few times larger than every first-quadrant equilibrium."""
    eqs = all_equilibria(c, mu)
    reach = max([abs(mu.mu1), abs(mu.mu2), 1e-3])
    for e in eqs:
        if e.exists and e.in_q1:
            reach = max(reach, e.state.xi1, e.state.xi2)
    return 2.5 * reach, 2.5 * reach


def nullclines(c: Coefficients, mu: ParamPoint, window: tuple[float, float], n: int = 201) -> dict[str, list[np.ndarray]]:
    """Interior zero sets of the two growth rates (the axes are nullclines as well)."""
    x = np.linspace(0.0, window[0], n)
    y = np.linspace(0.0, window[1], n)
    X, Y = np.meshgrid(x, y)
    g1, g2 = growth_rates(c, mu.mu1, mu.mu2, X, Y)
    out = {}
    for name, z in (("xi1", g1), ("xi2", g2)):
        gen = contourpy.contour_generator(X, Y, z)
        out[name] = [np.asarray(line) for line in gen.lines(0.0)]
    return out


def phase_portrait(
    c: Coefficients,
    mu: ParamPoint,
    n_seeds: int = 6,
    window: tuple[float, float] | None = None,
    t_span: float | None = None,
    rtol: float = RTOL,
    atol: float = ATOL,
) -> Portrait:
    """Forward and backward orbits from an n_seeds x n_seeds grid, plus axis seeds."""
    window = window or default_window(c, mu)
    rate = max(abs(mu.mu1), abs(mu.mu2), 1e-3)
    t_span = t_span or 8.0 / rate
    gx = np.linspace(0, window[0], n_seeds + 2)[1:-1]
    gy = np.linspace(0, window[1], n_seeds + 2)[1:-1]
    seeds = [(a, b) for a in gx for b in gy]
    seeds += [(a, 0.0) for a in gx[::2]] + [(0.0, b) for b in gy[::2]]
    box = (3 * window[0], 3 * window[1])
    fwd = integrate_batch(c, mu, seeds, t_span, box=box, rtol=rtol, atol=atol, conv_tol=1e-14)
    bwd = integrate_batch(c, mu, seeds, -t_span, box=box, rtol=rtol, atol=atol, conv_tol=1e-14)
    eqs = classify_all(c, mu, all_equilibria(c, mu))
    return Portrait(c, mu, window, fwd + bwd, nullclines(c, mu, window), eqs)


def render_portrait(portrait: Portrait, path: str | Path) -> Path:
    fig, ax = new_figure()
    wx, wy = portrait.window
    for orb in portrait.orbits:
        if orb.terminal_reason == "cycle_detected":
            ax.plot(orb.xi[:, 0], orb.xi[:, 1], color="tab:orange", linewidth=1.6, zorder=4)
            continue
        ax.plot(orb.xi[:, 0], orb.xi[:, 1], color="tab:gray", linewidth=0.6)
        if len(orb.xi) > 2:
            k = len(orb.xi) // 2
            x0, y0 = orb.xi[k]
            x1, y1 = orb.xi[min(k + 1, len(orb.xi) - 1)]
            if orb.t[-1] < 0:
                x0, y0, x1, y1 = x1, y1, x0, y0
            ax.annotate("", xy=(x1, y1), xytext=(x0, y0), arrowprops={"arrowstyle": "->", "color": "tab:gray", "lw": 0.6})
    for name, lines in portrait.nullclines.items():
        style = "--" if name == "xi1" else "-."
        for line in lines:
            ax.plot(line[:, 0], line[:, 1], style, color="tab:green", linewidth=0.8)
    for tag, cl in portrait.equilibria.items():
        e = cl.equilibrium
        if e.exists and e.in_q1:
            mark_equilibrium(ax, e.state.xi1, e.state.xi2, cl.cls.kind.code, f"{tag.value} ({cl.cls.kind.code})")
    ax.set_xlim(-0.02 * wx, wx)
    ax.set_ylim(-0.02 * wy, wy)
    ax.set_xlabel("xi1")
    ax.set_ylabel("xi2")
    ax.set_title(f"mu = ({portrait.mu.mu1:.4g}, {portrait.mu.mu2:.4g})")
    return save_svg(fig, path)


# ---------------------------------------------------------------- Hopf analysis


@dataclass
class HopfData:
    mu_on_H: ParamPoint
    omega: float
    l1: float
    l1_return_map: float | None = None
    cycle: Orbit | None = None
    cycle_radius: float | None = None
    cycle_mu: ParamPoint | None = None
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "mu_on_H": list(self.mu_on_H),
            "omega": self.omega,
            "l1": self.l1,
            "l1_return_map": self.l1_return_map,
            "cycle_radius": self.cycle_radius,
            "cycle_mu": list(self.cycle_mu) if self.cycle_mu else None,
            "cycle_period": self.cycle.period if self.cycle else None,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)


def _focus_data(c: Coefficients, mu: ParamPoint):
    e3 = locate_E3(c, mu)
    if not e3.in_q1:
        raise PreconditionError("E3 is not in the first quadrant")
    x = e3.state.as_array()
    q = discriminant_E3(c, *x)
    if not q < 0:
        raise PreconditionError(f"E3 is not a focus (q = {q:.3g} >= 0)")
    return e3, x, jacobian(c, mu, x)


def _critical_vectors(a: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """omega, q with A q = i omega q, |q| = 1, and p with A^T p = -i omega p, <p, q> = 1."""
    vals, vecs = np.linalg.eig(a)
    k = int(np.argmax(vals.imag))
    omega = float(vals[k].imag)
    q = vecs[:, k] / np.linalg.norm(vecs[:, k])
    lvals, lvecs = np.linalg.eig(a.T)
    j = int(np.argmin(lvals.imag))
    p = lvecs[:, j]
    p = p / np.conj(np.vdot(p, q))
    return omega, q, p


def first_lyapunov_coefficient(a: np.ndarray, hs: np.ndarray, ts: np.ndarray) -> float:
    """l1 of a planar field at an equilibrium with Jacobian a (eigenvalues +-i omega).

    hs and ts are the second and third derivative tensors there.
    """
    omega, q, p = _critical_vectors(a)

    def B(u, v):
        return np.einsum("ijk,j,k->i", hs, u, v)

    def C(u, v, w):
        return np.einsum("ijkl,j,k,l->i", ts, u, v, w)

    qb = np.conj(q)
    term1 = np.vdot(p, C(q, q, qb))
    term2 = np.vdot(p, B(q, np.linalg.solve(a, B(q, qb))))
    term3 = np.vdot(p, B(qb, np.linalg.solve(2j * omega * np.eye(2) - a, B(q, q))))
    return float(np.real(term1 - 2 * term2 + term3) / (2 * omega))


def _l1_normal_form(c: Coefficients, x: np.ndarray, a: np.ndarray) -> float:
    return first_lyapunov_coefficient(a, hessian(c, x), third_derivative(c))


class _ReturnMap:
    """Poincare map on the ray from E3 along direction d (crossing with positive orientation)."""

    def __init__(self, c: Coefficients, mu: ParamPoint, center: np.ndarray, d: np.ndarray, omega: float):
        self.c, self.mu, self.center = c, mu, center
        self.d = d / np.linalg.norm(d)
        n = np.array([-self.d[1], self.d[0]])
        probe = np.array(jacobian(c, mu, center)) @ self.d
        self.n = n if n @ probe > 0 else -n
        self.period_guess = 2 * math.pi / omega

    def section(self, xi: np.ndarray) -> float:
        return float(self.n @ (xi - self.center))

    def __call__(self, s: float, keep_path: bool = False):
        start = self.center + s * self.d
        hit = flow_to_section(
            self.c,
            self.mu,
            start,
            self.section,
            t_min=0.5 * self.period_guess,
            t_max=20 * self.period_guess,
            keep_path=keep_path,
        )
        if hit is None:
            raise NoCycleFound("orbit did not return to the section")
        return float(self.d @ (hit.xi - self.center)), hit


def _l1_return_map(c: Coefficients, mu: ParamPoint, x: np.ndarray, a: np.ndarray, scale: float) -> float:
    omega, q, _ = _critical_vectors(a)
    direction = np.real(q)
    rm = _ReturnMap(c, mu, x, direction, omega)
    amp = 2 * np.linalg.norm(np.real(q))
    vals = []
    for s in (scale, 0.5 * scale):
        s_next, _ = rm(s)
        r = s / amp
        vals.append(math.log(s_next / s) / (2 * math.pi * r * r))
    # the per-revolution estimate carries an O(r) error; extrapolate it away
    return 2 * vals[1] - vals[0]


def lyapunov_l1(
    c: Coefficients,
    mu_on_H: ParamPoint,
    tol_p: float = 1e-9,
    degenerate_tol: float = 1e-8,
    return_map: bool = True,
) -> HopfData:
    """First Lyapunov coefficient at a Hopf point, by normal form and by return map.

    The normal-form value uses analytic second and third derivatives; the
    return-map value fits log(r_next / r) per revolution against r^2 on a
    small circle around E3. The two must agree in sign.
    """
    e3, x, a = _focus_data(c, mu_on_H)
    p = half_trace_E3(c, *x)
    if abs(p) > tol_p * max(1.0, np.max(np.abs(a))):
        raise PreconditionError(f"mu is not on the Hopf curve: p(E3) = {p:.3g}")
    l1 = _l1_normal_form(c, x, a)
    omega = math.sqrt(max(np.linalg.det(a), 0.0))
    notes = []
    if abs(l1) < degenerate_tol:
        raise DegenerateHopfError(
            f"degenerate Hopf: |l1| = {abs(l1):.2e} < {degenerate_tol:.0e}; "
            "codimension-two analysis is out of scope"
        )
    l1_rm = None
    if return_map:
        l1_rm = _l1_return_map(c, mu_on_H, x, a, 0.02 * float(np.min(x)))
        if math.copysign(1, l1_rm) != math.copysign(1, l1):
            notes.append("normal-form and return-map estimates of l1 disagree in sign")
    return HopfData(mu_on_H, omega, l1, l1_rm, notes=notes)


def detect_cycle(
    c: Coefficients,
    mu: ParamPoint,
    near: State | None = None,
    s_min: float | None = None,
    s_max: float | None = None,
    n_grid: int = 12,
) -> Orbit:
    """Find an isolated periodic orbit around the focus E3 via its return map.

    The displacement P(s) - s is scanned on a geometric grid of distances s
    along a ray from E3, and a sign change is refined to the fixed point.
    ``near`` (a point on the suspected cycle) narrows the scan around it.
    """
    try:
        e3, x, a = _focus_data(c, mu)
    except (PreconditionError, EquilibriumError) as err:
        raise NoCycleFound(f"no focus to encircle: {err}") from None
    vals = np.linalg.eigvals(a)
    omega = float(np.max(vals.imag))
    d = np.real(np.linalg.eig(a)[1][:, int(np.argmax(np.linalg.eig(a)[0].imag))])
    rm = _ReturnMap(c, mu, x, d, omega)
    room = 0.9 * float(np.min(x))
    if near is not None:
        s0 = float(np.linalg.norm(near.as_array() - x))
        s_min, s_max = s_min or 0.3 * s0, s_max or min(3 * s0, room)
    s_min = s_min or 1e-4 * room
    s_max = min(s_max or room, room)
    grid = np.geomspace(s_min, s_max, n_grid)

    def disp(s):
        return rm(s)[0] - s

    prev_s, prev_d = None, None
    bracket = None
    for s in grid:
        try:
            ds = disp(s)
        except (NoCycleFound, IntegrationError):
            break
        if prev_d is not None and prev_d * ds < 0:
            bracket = (prev_s, s)
            break
        prev_s, prev_d = s, ds
    if bracket is None:
        raise NoCycleFound("return displacement keeps its sign over the search annulus")
    s_star = brentq(disp, *bracket, xtol=1e-13 * bracket[1], rtol=1e-14)
    s_next, hit = rm(s_star, keep_path=True)
    if abs(s_next - s_star) > 1e-8 * s_star:
        raise NoCycleFound(f"return map fixed point not converged: |dr| = {abs(s_next - s_star):.2e}")
    ts = np.array([t for t, _ in hit.path])
    xs = np.array([xi for _, xi in hit.path])
    start = x + s_star * rm.d
    return Orbit(State(*start), ts, xs, "cycle_detected", period=hit.t, radius=s_star)
