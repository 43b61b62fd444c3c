"""Adaptive Dormand-Prince 5(4) integration of the canonical field in Q1.

Positive components are integrated as u = log(xi), u' = g(xi), so a
trajectory can never cross an axis. Components that start at exactly zero
stay exactly zero (u = -inf) and the remaining component then follows the
reduced on-axis equation. Many orbits are advanced together with
independent step sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import IntegrationError
from .model import Coefficients, ParamPoint, State, growth_rates

RTOL = 1e-9
ATOL = 1e-12
LOG_TOL = 1e-6  # extra relative control for components close to an axis

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = _B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])

TERMINAL_REASONS = (
    "t_max",
    "left_box",
    "converged_to_equilibrium",
    "cycle_detected",
    "step_underflow",
)


@dataclass
class Orbit:
    initial: State
    t: np.ndarray
    xi: np.ndarray
    terminal_reason: str
    diagnostic: str | None = None
    period: float | None = None
    radius: float | None = None

    @property
    def samples(self) -> list[tuple[float, State]]:
        return [(float(t), State(float(a), float(b))) for t, (a, b) in zip(self.t, self.xi)]

    @property
    def final(self) -> State:
        return State(float(self.xi[-1, 0]), float(self.xi[-1, 1]))

    def to_csv_rows(self) -> list[tuple[float, float, float]]:
        return [(float(t), float(a), float(b)) for t, (a, b) in zip(self.t, self.xi)]


class LogField:
    """u' for u = log(xi); ``sign`` = -1 integrates backward in time."""

    def __init__(self, c: Coefficients, mu: ParamPoint, sign: float = 1.0):
        self.c, self.mu, self.sign = c, mu, sign

    def __call__(self, u: np.ndarray, mask: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            xi = np.exp(u)
            g1, g2 = growth_rates(self.c, self.mu.mu1, self.mu.mu2, xi[:, 0], xi[:, 1])
            du = self.sign * np.stack([g1, g2], axis=1)
        return np.where(mask, du, 0.0)


def dp_attempt(fld: LogField, u, mask, h, k1):
    """One Dormand-Prince step of sizes h (shape (n,)); returns (u5, k7, error in u)."""
    ks = [k1]
    hh = h[:, None]
    for i in range(1, 7):
        du = sum(a * k for a, k in zip(_A[i], ks))
        ks.append(fld(np.where(mask, u + hh * du, u), mask))
    with np.errstate(over="ignore", invalid="ignore"):
        u5 = np.where(mask, u + hh * sum(b * k for b, k in zip(_B, ks)), u)
        err = np.where(mask, hh * sum(e * k for e, k in zip(_E, ks)), 0.0)
    return u5, ks[6], err


def _error_norm(u_old, u_new, err, mask, rtol, atol):
    with np.errstate(over="ignore", invalid="ignore"):
        xi = np.maximum(np.exp(u_old), np.exp(u_new))
        scaled = np.maximum(xi * np.abs(err) / (atol + rtol * xi), np.abs(err) / LOG_TOL)
    scaled = np.where(mask, scaled, 0.0)
    out = np.max(scaled, axis=1)
    return np.where(np.isfinite(out), out, np.inf)


def to_log(initial: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.atleast_2d(np.asarray(initial, dtype=float))
    mask = x > 0
    with np.errstate(divide="ignore"):
        u = np.where(mask, np.log(np.where(mask, x, 1.0)), -np.inf)
    return u, mask


def _initial_step(k1, span):
    speed = np.max(np.abs(k1), axis=1)
    return np.minimum(0.05 / np.maximum(speed, 1e-8), 0.1 * span)


def integrate_batch(
    c: Coefficients,
    mu: ParamPoint,
    initials,
    t_max: float,
    box: float | tuple[float, float] = 10.0,
    rtol: float = RTOL,
    atol: float = ATOL,
    conv_tol: float | None = 1e-12,
    max_steps: int = 200_000,
    record: bool = True,
) -> list[Orbit]:
    """Integrate many orbits from ``initials`` (shape (n, 2)) over [0, t_max].

    A negative t_max runs backward. Orbits stop early when a coordinate
    exceeds ``box`` or, if ``conv_tol`` is set, when the speed |f| falls
    below it.
    """
    x0 = np.atleast_2d(np.asarray(initials, dtype=float))
    if np.any(x0 < 0):
        raise IntegrationError("initial states must lie in the closed first quadrant")
    n = len(x0)
    bx = np.broadcast_to(np.asarray(box, dtype=float), (2,))
    sign = 1.0 if t_max >= 0 else -1.0
    span = abs(t_max)
    fld = LogField(c, mu, sign)
    u, mask = to_log(x0)
    t = np.zeros(n)
    k1 = fld(u, mask)
    h = _initial_step(k1, span) if span > 0 else np.zeros(n)
    prev_err = np.ones(n)
    active = np.full(n, span > 0)
    reasons = np.array(["t_max"] * n, dtype=object)
    diag: list[str | None] = [None] * n
    ts = [[0.0] for _ in range(n)]
    xs = [[x0[i].copy()] for i in range(n)]
    steps = np.zeros(n, dtype=int)
    # an orbit that starts at rest stays there
    if conv_tol is not None and span > 0:
        speed0 = np.max(np.abs(np.exp(u) * k1), axis=1)
        at_rest = speed0 <= conv_tol
        reasons[at_rest] = "converged_to_equilibrium"
        active &= ~at_rest
    while np.any(active):
        idx = np.flatnonzero(active)
        hi = np.minimum(h[idx], span - t[idx])
        u5, k7, err = dp_attempt(fld, u[idx], mask[idx], hi, k1[idx])
        en = _error_norm(u[idx], u5, err, mask[idx], rtol, atol)
        ok = en <= 1.0
        safe = np.maximum(en, 1e-10)
        fac_ok = 0.9 * safe ** (-0.7 / 5) * prev_err[idx] ** (0.4 / 5)
        fac_bad = 0.9 * safe ** (-1 / 5)
        fac = np.where(ok, np.clip(fac_ok, 0.2, 5.0), np.clip(fac_bad, 0.1, 0.9))
        h[idx] = np.where(np.isfinite(fac), hi * fac, 0.1 * hi)
        acc = idx[ok]
        if len(acc):
            u[acc] = u5[ok]
            k1[acc] = k7[ok]
            t[acc] += hi[ok]
            prev_err[acc] = np.maximum(en[ok], 1e-4)
            steps[acc] += 1
            xi = np.exp(u[acc])
            if record:
                for j, i in enumerate(acc):
                    ts[i].append(sign * t[i])
                    xs[i].append(xi[j])
            out = np.any(xi > bx, axis=1) | ~np.all(np.isfinite(xi), axis=1)
            done = t[acc] >= span * (1 - 1e-15)
            reasons[acc[done]] = "t_max"
            conv = np.zeros(len(acc), dtype=bool)
            if conv_tol is not None:
                speed = np.max(np.abs(xi * k1[acc]), axis=1)
                conv = speed <= conv_tol
                reasons[acc[conv & ~done]] = "converged_to_equilibrium"
            reasons[acc[out]] = "left_box"
            active[acc[done | conv | out]] = False
            over = acc[steps[acc] >= max_steps]
            for i in over:
                diag[i] = f"step budget of {max_steps} exhausted at t={sign * t[i]:.6g}"
            active[over] = False
        tiny = idx[h[idx] <= 1e-13 * np.maximum(1.0, t[idx])]
        for i in tiny:
            if active[i]:
                active[i] = False
                reasons[i] = "step_underflow"
                diag[i] = f"step size underflow at t={sign * t[i]:.6g}"
    orbits = []
    for i in range(n):
        if not record:
            ts[i].append(sign * t[i])
            xs[i].append(np.exp(u[i]))
        orbits.append(
            Orbit(
                State(float(x0[i, 0]), float(x0[i, 1])),
                np.array(ts[i]),
                np.array(xs[i]),
                str(reasons[i]),
                diag[i],
            )
        )
    return orbits


def integrate(
    c: Coefficients,
    mu: ParamPoint,
    initial: State,
    t_max: float,
    box: float | tuple[float, float] = 10.0,
    **kw,
) -> Orbit:
    if not initial.in_first_quadrant(0.0):
        raise IntegrationError("initial state must lie in the closed first quadrant")
    return integrate_batch(c, mu, [tuple(initial)], t_max, box, **kw)[0]


@dataclass
class SectionHit:
    t: float
    xi: np.ndarray
    steps: int = 0
    path: list[tuple[float, np.ndarray]] = field(default_factory=list)


def flow_to_section(
    c: Coefficients,
    mu: ParamPoint,
    start: np.ndarray,
    section,
    t_min: float,
    t_max: float,
    rtol: float = 1e-11,
    atol: float = 1e-14,
    keep_path: bool = False,
) -> SectionHit | None:
    """Integrate one orbit until ``section(xi)`` changes sign from - to + after t_min.

    The crossing inside the last step is located by root-finding on the size
    of a fresh step taken from the step's left end.
    """
    fld = LogField(c, mu, 1.0)
    u, mask = to_log(start)
    if not np.all(mask):
        raise IntegrationError("section integration needs an interior start")
    k1 = fld(u, mask)
    h = _initial_step(k1, t_max)
    t, prev_err, steps = 0.0, 1.0, 0
    s_prev = section(np.exp(u[0]))
    path = [(0.0, np.exp(u[0]))] if keep_path else []
    while t < t_max:
        hh = min(h[0], t_max - t)
        u5, k7, err = dp_attempt(fld, u, mask, np.array([hh]), k1)
        en = float(_error_norm(u, u5, err, mask, rtol, atol)[0])
        if en > 1.0:
            h = np.array([hh * max(0.1, 0.9 * en ** (-0.2))])
            if h[0] < 1e-13 * max(1.0, t):
                raise IntegrationError(f"step size underflow at t={t:.6g}")
            continue
        s_new = section(np.exp(u5[0]))
        if t + hh > t_min and s_prev < 0 <= s_new:
            u_left, k_left = u.copy(), k1.copy()

            def sec_at(s):
                if s == 0.0:
                    return s_prev
                us, _, _ = dp_attempt(fld, u_left, mask, np.array([s]), k_left)
                return section(np.exp(us[0]))

            s_star = brentq(sec_at, 0.0, hh, xtol=1e-15 * max(1.0, t), rtol=1e-15)
            us, _, _ = dp_attempt(fld, u_left, mask, np.array([s_star]), k_left)
            if keep_path:
                path.append((t + s_star, np.exp(us[0])))
            return SectionHit(t + s_star, np.exp(us[0]), steps, path)
        u, k1, t, s_prev = u5, k7, t + hh, s_new
        steps += 1
        if keep_path:
            path.append((t, np.exp(u[0])))
        fac = 0.9 * max(en, 1e-10) ** (-0.7 / 5) * prev_err ** (0.4 / 5)
        h = np.array([hh * min(5.0, max(0.2, fac))])
        prev_err = max(en, 1e-4)
    return None
