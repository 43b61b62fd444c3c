"""Characteristic quantities, eigenvalues and equilibrium types.

Every equilibrium has characteristic polynomial lambda^2 - 2*p*lambda + L
with eigenvalues p +- sqrt(q), q = p^2 - L. For the interior equilibrium E3
the closed forms in (xi1, xi2) below are used; they hold exactly at any
point satisfying both interior growth equations. The boundary equilibria
O, E1, E2 sit on invariant axes, so their eigenvalues are read off directly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .equilibria import Equilibrium, EquilibriumId, EquilibriumSet, TOL_EQ, all_equilibria
from .errors import PreconditionError
from .model import Coefficients, ParamPoint, jacobian

TOL_CLASS = 1e-10


@dataclass(frozen=True)
class CharQuantities:
    p: float
    L: float
    q: float
    c11: float
    c12: float


@dataclass(frozen=True)
class EigenPair:
    lambda1: complex
    lambda2: complex

    def sorted(self) -> list[complex]:
        return sorted((self.lambda1, self.lambda2), key=lambda z: (z.real, z.imag))


class Kind(str, enum.Enum):
    SADDLE = "saddle"
    STABLE_NODE = "stable_node"
    UNSTABLE_NODE = "unstable_node"
    STABLE_FOCUS = "stable_focus"
    UNSTABLE_FOCUS = "unstable_focus"
    NONHYPERBOLIC = "nonhyperbolic"
    CENTER_CANDIDATE = "center_candidate"

    @property
    def code(self) -> str:
        """Short code used in the region tables (s, sn, un, sf, uf)."""
        return _CODES.get(self, self.value)


_CODES = {
    Kind.SADDLE: "s",
    Kind.STABLE_NODE: "sn",
    Kind.UNSTABLE_NODE: "un",
    Kind.STABLE_FOCUS: "sf",
    Kind.UNSTABLE_FOCUS: "uf",
}


@dataclass(frozen=True)
class EquilibriumClass:
    kind: Kind
    margin: float


def aux_coefficients(c: Coefficients) -> tuple[float, float]:
    return c.M * c.delta - 2 * c.N + 2 * c.S * c.gamma, c.M + 2 * c.P * c.theta


def half_trace_E3(c: Coefficients, x1, x2):
    return 0.5 * x2 - 0.5 * c.theta * x1 + c.N * x1**2 - 0.5 * c.M * x1 * x2 + c.P * x2**2


def determinant_E3(c: Coefficients, x1, x2):
    c11, c12 = aux_coefficients(c)
    inner = (
        c.D
        + c11 * x1
        + c12 * x2
        - 4 * c.N * c.P * x1 * x2
        - 2 * c.M * c.S * x1**2
        + 2 * c.M * c.P * x2**2
    )
    return -x1 * x2 * inner


def discriminant_E3(c: Coefficients, x1, x2):
    """q = p^2 - L expanded as a quartic in (xi1, xi2); all ten terms."""
    th, g, d, M, N, S, P = c.theta, c.gamma, c.delta, c.M, c.N, c.S, c.P
    c11, c12 = aux_coefficients(c)
    return (
        0.25 * (th**2 * x1**2 + 2 * x1 * x2 * (th - 2 * g * d) + x2**2)
        - N * th * x1**3
        + 0.5 * (2 * N + M * th + 2 * c11) * x1**2 * x2
        + 0.5 * c12 * x1 * x2**2
        + P * x2**3
        + N**2 * x1**4
        - (N + 2 * S) * M * x1**3 * x2
        + 0.25 * (M**2 - 8 * N * P) * x1**2 * x2**2
        + M * P * x1 * x2**3
        + P**2 * x2**4
    )


def char_quantities_E3(c: Coefficients, e: Equilibrium, tol_eq: float = TOL_EQ) -> CharQuantities:
    if e.id is not EquilibriumId.E3 or not e.exists:
        raise PreconditionError(f"closed forms apply to an existing E3, got {e.id.value}")
    if not e.residual <= tol_eq:
        raise PreconditionError(f"E3 residual {e.residual:.2e} exceeds {tol_eq:.0e}")
    x1, x2 = e.state
    c11, c12 = aux_coefficients(c)
    return CharQuantities(
        p=half_trace_E3(c, x1, x2),
        L=determinant_E3(c, x1, x2),
        q=discriminant_E3(c, x1, x2),
        c11=c11,
        c12=c12,
    )


def eigenvalues(pq: CharQuantities) -> EigenPair:
    if pq.q >= 0:
        r = math.sqrt(pq.q)
        return EigenPair(complex(pq.p + r), complex(pq.p - r))
    r = math.sqrt(-pq.q)
    return EigenPair(complex(pq.p, r), complex(pq.p, -r))


def classify(pq: CharQuantities, tol: float = TOL_CLASS) -> EquilibriumClass:
    p, L, q = pq.p, pq.L, pq.q
    if L < -tol:
        return EquilibriumClass(Kind.SADDLE, abs(L))
    if L <= tol:
        return EquilibriumClass(Kind.NONHYPERBOLIC, abs(L))
    if abs(p) <= tol:
        return EquilibriumClass(Kind.CENTER_CANDIDATE, abs(p))
    margin = min(abs(L), abs(p), abs(q))
    stable = p < 0
    if q < -tol:
        return EquilibriumClass(Kind.STABLE_FOCUS if stable else Kind.UNSTABLE_FOCUS, margin)
    # |q| <= tol is a degenerate (star or improper) node: still hyperbolic
    return EquilibriumClass(Kind.STABLE_NODE if stable else Kind.UNSTABLE_NODE, margin)


def boundary_eigenvalues(c: Coefficients, mu: ParamPoint, e: Equilibrium) -> tuple[float, float]:
    """Exact eigenvalues at O, E1 or E2 (ordered: xi1-direction, xi2-direction)."""
    x1, x2 = e.state
    if e.id is EquilibriumId.O:
        return mu.mu1, mu.mu2
    if e.id is EquilibriumId.E1:
        return (
            mu.mu1 - 2 * c.theta * x1 + 3 * c.N * x1**2,
            mu.mu2 - c.delta * x1 + c.S * x1**2,
        )
    if e.id is EquilibriumId.E2:
        return mu.mu1 + c.gamma * x2, mu.mu2 + 2 * x2 + 3 * c.P * x2**2
    raise PreconditionError("E3 is not a boundary equilibrium")


def quantities_from_real_pair(c: Coefficients, la: float, lb: float) -> CharQuantities:
    c11, c12 = aux_coefficients(c)
    return CharQuantities(p=0.5 * (la + lb), L=la * lb, q=(0.5 * (la - lb)) ** 2, c11=c11, c12=c12)


def char_quantities(c: Coefficients, mu: ParamPoint, e: Equilibrium) -> CharQuantities:
    if e.id is EquilibriumId.E3:
        return char_quantities_E3(c, e)
    return quantities_from_real_pair(c, *boundary_eigenvalues(c, mu, e))


@dataclass(frozen=True)
class Classified:
    equilibrium: Equilibrium
    quantities: CharQuantities | None
    eigen: EigenPair | None
    cls: EquilibriumClass | None

    @property
    def status(self) -> str:
        """Table code, or '-' when the equilibrium is not in the closed first quadrant."""
        if not self.equilibrium.exists or not self.equilibrium.in_q1:
            return "-"
        return self.cls.kind.code


def classify_equilibrium(
    c: Coefficients, mu: ParamPoint, e: Equilibrium, tol: float = TOL_CLASS
) -> Classified:
    if not e.exists:
        return Classified(e, None, None, None)
    pq = char_quantities(c, mu, e)
    return Classified(e, pq, eigenvalues(pq), classify(pq, tol))


def classify_boundary_equilibria(
    c: Coefficients, mu: ParamPoint, eqs: EquilibriumSet | None = None, tol: float = TOL_CLASS
) -> dict[EquilibriumId, Classified]:
    eqs = eqs if eqs is not None else all_equilibria(c, mu)
    return {
        e.id: classify_equilibrium(c, mu, e, tol) for e in eqs if e.id is not EquilibriumId.E3
    }


def classify_all(
    c: Coefficients, mu: ParamPoint, eqs: EquilibriumSet | None = None, tol: float = TOL_CLASS
) -> dict[EquilibriumId, Classified]:
    eqs = eqs if eqs is not None else all_equilibria(c, mu)
    return {e.id: classify_equilibrium(c, mu, e, tol) for e in eqs}


@dataclass
class OracleReport:
    passed: bool
    failures: list[str] = field(default_factory=list)
    closed_form: dict[str, float] = field(default_factory=dict)
    numerical: dict[str, float] = field(default_factory=dict)


def _close(a: float, b: float, rtol: float, floor: float) -> bool:
    return abs(a - b) <= rtol * max(floor, abs(a), abs(b))


def oracle_check(
    c: Coefficients,
    mu: ParamPoint,
    e: Equilibrium,
    quantities: CharQuantities | None = None,
    rtol: float = 1e-10,
    floor: float = 1.0,
    eig_tol: float = 1e-8,
    check_eigenvalues: bool = True,
    cancellation: bool = True,
) -> OracleReport:
    """Compare closed-form p, L, q against the numerical Jacobian.

    The tolerance for each quantity x is ``rtol * max(floor, |x|, m)`` where
    m is the magnitude of the summands the oracle adds up (|J11| + |J22| for
    the trace, |J11 J22| + |J12 J21| for the determinant), which bounds its
    own rounding when x cancels to nearly zero. Pass ``floor=0`` and
    ``cancellation=False`` for a purely relative comparison. A
    ``quantities`` argument overrides the closed forms (for checking a
    candidate formula).
    """
    if not e.exists or not e.residual <= TOL_EQ:
        raise PreconditionError("oracle_check needs a located equilibrium")
    pq = quantities if quantities is not None else char_quantities(c, mu, e)
    jac = jacobian(c, mu, e.state)
    half_tr = 0.5 * (jac[0, 0] + jac[1, 1])
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    num = {"p": half_tr, "L": det, "q": half_tr**2 - det}
    closed = {"p": pq.p, "L": pq.L, "q": pq.q}
    mags = {"p": 0.0, "L": 0.0, "q": 0.0}
    if cancellation:
        mags["p"] = 0.5 * (abs(jac[0, 0]) + abs(jac[1, 1]))
        mags["L"] = abs(jac[0, 0] * jac[1, 1]) + abs(jac[0, 1] * jac[1, 0])
        mags["q"] = mags["p"] ** 2 + mags["L"]
    failures = [k for k in ("p", "L", "q") if not _close(closed[k], num[k], rtol, max(floor, mags[k]))]
    if check_eigenvalues:
        ev_num = sorted(np.linalg.eigvals(jac).astype(complex), key=lambda z: (z.real, z.imag))
        ev_closed = eigenvalues(pq).sorted()
        if any(abs(a - b) > eig_tol for a, b in zip(ev_num, ev_closed)):
            failures.append("eigenvalues")
    return OracleReport(not failures, failures, closed, num)

