"""Built-in representative coefficient sets, one per diagram case.

Each set carries the sign conditions that select its case, so callers can
re-assert them before use. The cubic coefficients are moderate and chosen
so that every a = 0 variant has the intended sign of d; the Case VII set
has a negative first Lyapunov coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .curves import CaseId, a_is_zero, cubic_case_coeffs, quad_coeffs
from .model import Coefficients

_CUBIC = {"M": 0.3, "N": -0.2, "S": 0.4, "P": -0.3}
_CUBIC_FLIPPED = {k: -v for k, v in _CUBIC.items()}

Condition = tuple[str, Callable[[Coefficients], bool]]


def _a(c: Coefficients) -> float:
    return quad_coeffs(c).a


def _d(c: Coefficients) -> float:
    return cubic_case_coeffs(c).c3_d


_SHARED_1B: list[Condition] = [
    ("theta - gamma*delta < 0", lambda c: c.D < 0),
    ("delta < 0", lambda c: c.delta < 0),
    ("theta < 0", lambda c: c.theta < 0),
]

CONDITIONS: dict[CaseId, list[Condition]] = {
    CaseId.I: [
        ("theta < gamma*delta < 0", lambda c: c.theta < c.gamma * c.delta < 0),
        ("delta > 0", lambda c: c.delta > 0),
    ],
    CaseId.II: _SHARED_1B + [("a > 0", lambda c: _a(c) > 0), ("-1 < gamma < 0", lambda c: -1 < c.gamma < 0)],
    CaseId.III: _SHARED_1B + [("a > 0", lambda c: _a(c) > 0), ("gamma < -1", lambda c: c.gamma < -1)],
    CaseId.IV: _SHARED_1B + [("a < 0", lambda c: _a(c) < 0)],
    CaseId.Va: _SHARED_1B
    + [("a = 0", a_is_zero), ("gamma < -1", lambda c: c.gamma < -1), ("d < 0", lambda c: _d(c) < 0)],
    CaseId.Vb: _SHARED_1B
    + [("a = 0", a_is_zero), ("gamma < -1", lambda c: c.gamma < -1), ("d > 0", lambda c: _d(c) > 0)],
    CaseId.VIa: _SHARED_1B
    + [("a = 0", a_is_zero), ("-1 < gamma < 0", lambda c: -1 < c.gamma < 0), ("d > 0", lambda c: _d(c) > 0)],
    CaseId.VIb: _SHARED_1B
    + [("a = 0", a_is_zero), ("-1 < gamma < 0", lambda c: -1 < c.gamma < 0), ("d < 0", lambda c: _d(c) < 0)],
    CaseId.VII: [
        ("theta - gamma*delta < 0", lambda c: c.D < 0),
        ("delta < 0", lambda c: c.delta < 0),
        ("0 < theta < gamma*delta", lambda c: 0 < c.theta < c.gamma * c.delta),
    ],
    CaseId.VIII: [
        ("theta - gamma*delta > 0", lambda c: c.D > 0),
        ("delta > 0", lambda c: c.delta > 0),
        ("theta < 0", lambda c: c.theta < 0),
    ],
    CaseId.IX: [
        ("theta - gamma*delta > 0", lambda c: c.D > 0),
        ("delta > 0", lambda c: c.delta > 0),
        ("theta > 0", lambda c: c.theta > 0),
    ],
    CaseId.X: [("theta - gamma*delta > 0", lambda c: c.D > 0), ("delta < 0", lambda c: c.delta < 0)],
}


@dataclass(frozen=True)
class Preset:
    case: CaseId
    coefficients: Coefficients

    def failed_conditions(self) -> list[str]:
        c = self.coefficients
        return [text for text, ok in CONDITIONS[self.case] if not ok(c)]


PRESETS: dict[str, Preset] = {
    p.case.value: p
    for p in (
        Preset(CaseId.I, Coefficients(-2.0, -1.0, 1.0, **_CUBIC)),
        Preset(CaseId.II, Coefficients(-2.0, -0.5, -0.25, **_CUBIC)),
        Preset(CaseId.III, Coefficients(-2.0, -3.0, -0.1, **_CUBIC)),
        Preset(CaseId.IV, Coefficients(-2.0, -0.5, -10.0, **_CUBIC)),
        # a = 0 exactly: theta = 4*gamma^2*delta / (1 + gamma)^2
        Preset(CaseId.Va, Coefficients(-16.0, -2.0, -1.0, **_CUBIC)),
        Preset(CaseId.Vb, Coefficients(-16.0, -2.0, -1.0, **_CUBIC_FLIPPED)),
        Preset(CaseId.VIa, Coefficients(-4.0, -0.5, -1.0, **_CUBIC)),
        Preset(CaseId.VIb, Coefficients(-4.0, -0.5, -1.0, **_CUBIC_FLIPPED)),
        Preset(CaseId.VII, Coefficients(1.0, -1.0, -2.0, M=-1.0, N=-1.0)),
        Preset(CaseId.VIII, Coefficients(-1.0, -2.0, 1.0, **_CUBIC)),
        Preset(CaseId.IX, Coefficients(1.0, -1.0, 2.0, **_CUBIC)),
        Preset(CaseId.X, Coefficients(2.0, -1.0, -1.0, **_CUBIC)),
    )
}


def preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown parameter set {name!r}; choose from {', '.join(PRESETS)}") from None
