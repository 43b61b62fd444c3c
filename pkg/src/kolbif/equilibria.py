"""Locate the four equilibria O, E1, E2, E3 of the canonical system.

E1 and E2 come from scalar quadratics and are computed in closed form. E3
solves the pair of interior growth equations by damped Newton iteration
seeded at the lowest-order solution. Equilibria outside the first quadrant
("virtual" ones) are returned like any other; only the ``in_q1`` flag tells
them apart.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCoefficientsError, EquilibriumError, KolbifError
from .model import Coefficients, ParamPoint, State, growth_rates, vector_field

TOL_EQ = 1e-12
TOL_GEOM = 1e-12
TOL_COLLIDE = 1e-9


class EquilibriumId(str, enum.Enum):
    O = "O"
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"


@dataclass(frozen=True)
class Equilibrium:
    id: EquilibriumId
    state: State
    in_q1: bool
    residual: float
    exists: bool = True
    diagnostic: str | None = None
    iterations: int = 0

    @classmethod
    def missing(cls, tag: EquilibriumId, reason: str) -> "Equilibrium":
        nan = float("nan")
        return cls(tag, State(nan, nan), False, nan, exists=False, diagnostic=reason)


def _residual(c: Coefficients, mu: ParamPoint, s: State) -> float:
    f1, f2 = vector_field(c, mu, s)
    return max(abs(f1), abs(f2))


def _make(tag, c, mu, s, tol_geom, iterations=0) -> Equilibrium:
    return Equilibrium(
        tag, s, s.in_first_quadrant(tol_geom), _residual(c, mu, s), iterations=iterations
    )


def small_root(a2: float, a1: float, a0: float) -> float:
    """Root of a2*x**2 + a1*x + a0 = 0 nearest zero.

    This is the branch continuing -a0/a1. The large root is formed first so
    the small one comes from Vieta's product without cancellation.
    """
    if a2 == 0:
        return -a0 / a1
    disc = a1 * a1 - 4 * a2 * a0
    if disc < 0:
        raise EquilibriumError("nonexistent: negative discriminant")
    big = -0.5 * (a1 + math.copysign(math.sqrt(disc), a1))
    if big == 0:
        return 0.0
    r_big, r_small = big / a2, a0 / big
    if r_big != r_small and abs(r_big) == abs(r_small):
        raise EquilibriumError("ambiguous branch: roots equidistant from zero")
    return r_small if abs(r_small) <= abs(r_big) else r_big


def locate_E1(c: Coefficients, mu: ParamPoint, tol_geom: float = TOL_GEOM) -> Equilibrium:
    if c.theta == 0:
        raise DegenerateCoefficientsError("E1 requires theta != 0")
    try:
        x1 = small_root(c.N, -c.theta, mu.mu1)
    except EquilibriumError as err:
        raise EquilibriumError(f"E1 {err}") from None
    return _make(EquilibriumId.E1, c, mu, State(x1, 0.0), tol_geom)


def locate_E2(c: Coefficients, mu: ParamPoint, tol_geom: float = TOL_GEOM) -> Equilibrium:
    try:
        x2 = small_root(c.P, 1.0, mu.mu2)
    except EquilibriumError as err:
        raise EquilibriumError(f"E2 {err}") from None
    return _make(EquilibriumId.E2, c, mu, State(0.0, x2), tol_geom)


def e3_seed(c: Coefficients, mu: ParamPoint) -> tuple[float, float]:
    d = c.D
    return (mu.mu1 - c.gamma * mu.mu2) / d, (c.delta * mu.mu1 - c.theta * mu.mu2) / d


def locate_E3(
    c: Coefficients,
    mu: ParamPoint,
    tol_eq: float = TOL_EQ,
    tol_geom: float = TOL_GEOM,
    max_iter: int = 50,
) -> Equilibrium:
    if c.D == 0:
        raise DegenerateCoefficientsError("E3 requires theta - gamma*delta != 0")
    x = np.array(e3_seed(c, mu))

    def interior(v):
        return np.array(growth_rates(c, mu.mu1, mu.mu2, v[0], v[1]))

    g = interior(x)
    n_steps = 0
    for _ in range(max_iter):
        gnorm = np.max(np.abs(g))
        if gnorm <= 1e-17 * max(abs(mu.mu1), abs(mu.mu2), np.max(np.abs(x))):
            break
        jac = np.array(
            [
                [-c.theta - c.M * x[1] + 2 * c.N * x[0], c.gamma - c.M * x[0]],
                [-c.delta + 2 * c.S * x[0], 1 + 2 * c.P * x[1]],
            ]
        )
        if abs(np.linalg.det(jac)) < 1e-14:
            raise EquilibriumError("E3 indeterminate at this mu: singular Newton matrix")
        step = np.linalg.solve(jac, -g)
        lam = 1.0
        while True:
            trial = x + lam * step
            g_trial = interior(trial)
            if np.max(np.abs(g_trial)) <= (1 - 0.25 * lam) * gnorm or lam < 1e-6:
                break
            lam *= 0.5
        n_steps += 1
        moved = np.max(np.abs(trial - x))
        x, g = trial, g_trial
        if moved <= 4e-16 * max(np.max(np.abs(x)), 1e-300):
            break
    s = State(float(x[0]), float(x[1]))
    if not np.all(np.isfinite(x)) or np.max(np.abs(g)) > tol_eq:
        raise EquilibriumError("E3 indeterminate at this mu: Newton did not converge")
    eq = _make(EquilibriumId.E3, c, mu, s, tol_geom, iterations=n_steps)
    if eq.residual > tol_eq:
        raise EquilibriumError("E3 indeterminate at this mu: residual too large")
    return eq


@dataclass
class EquilibriumSet:
    """The four equilibria at one parameter point, with coincidences recorded."""

    members: list[Equilibrium]
    collisions: list[tuple[EquilibriumId, EquilibriumId]] = field(default_factory=list)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __getitem__(self, tag) -> Equilibrium:
        tag = EquilibriumId(tag)
        for e in self.members:
            if e.id is tag:
                return e
        raise KeyError(tag)

    def distinct(self) -> list[list[Equilibrium]]:
        """Existing equilibria grouped so that collided ones share a group."""
        groups: list[list[Equilibrium]] = []
        for e in self.members:
            if not e.exists:
                continue
            for grp in groups:
                if any((g.id, e.id) in self.collisions for g in grp):
                    grp.append(e)
                    break
            else:
                groups.append([e])
        return groups


def all_equilibria(
    c: Coefficients,
    mu: ParamPoint,
    tol_eq: float = TOL_EQ,
    tol_geom: float = TOL_GEOM,
    tol_collide: float = TOL_COLLIDE,
) -> EquilibriumSet:
    members = [_make(EquilibriumId.O, c, mu, State(0.0, 0.0), tol_geom)]
    locators = (
        (EquilibriumId.E1, lambda: locate_E1(c, mu, tol_geom)),
        (EquilibriumId.E2, lambda: locate_E2(c, mu, tol_geom)),
        (EquilibriumId.E3, lambda: locate_E3(c, mu, tol_eq, tol_geom)),
    )
    for tag, locate in locators:
        try:
            members.append(locate())
        except KolbifError as err:
            members.append(Equilibrium.missing(tag, str(err)))
    collisions = []
    for i, a in enumerate(members):
        for b in members[i + 1 :]:
            if a.exists and b.exists:
                gap = max(abs(a.state.xi1 - b.state.xi1), abs(a.state.xi2 - b.state.xi2))
                if gap <= tol_collide:
                    collisions.append((a.id, b.id))
    return EquilibriumSet(members, collisions)
