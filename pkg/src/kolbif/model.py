"""Core numeric types and the canonical planar Kolmogorov vector field.

The canonical system in coordinates (xi1, xi2) is

    xi1' = xi1 * (mu1 - theta*xi1 + gamma*xi2 - M*xi1*xi2 + N*xi1**2)
    xi2' = xi2 * (mu2 - delta*xi1 + xi2 + S*xi1**2 + P*xi2**2)

Coefficients are frozen at their mu = 0 values. Every function here is pure
and works elementwise on numpy arrays as well as on floats.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import DegenerateCoefficientsError, SignCaseError

DEFAULT_RADIUS = 0.1


@dataclass(frozen=True)
class ParamPoint:
    mu1: float
    mu2: float

    @property
    def norm(self) -> float:
        return math.hypot(self.mu1, self.mu2)

    def __iter__(self):
        yield self.mu1
        yield self.mu2

    def check_radius(self, radius: float = DEFAULT_RADIUS) -> "ParamPoint":
        if self.norm > radius:
            raise ValueError(f"|mu| = {self.norm:.3g} exceeds the analysis radius {radius:g}")
        return self


@dataclass(frozen=True)
class State:
    xi1: float
    xi2: float

    def __iter__(self):
        yield self.xi1
        yield self.xi2

    def as_array(self) -> np.ndarray:
        return np.array([self.xi1, self.xi2], dtype=float)

    def in_first_quadrant(self, tol: float = 1e-12) -> bool:
        return self.xi1 >= -tol and self.xi2 >= -tol


@dataclass(frozen=True)
class Coefficients:
    """The frozen coefficient tuple of the canonical system.

    Scope invariants (gamma < 0, theta*delta != 0, theta - gamma*delta != 0)
    are checked by :meth:`validate`, which the case machinery and the CLI
    call at their entry points. Construction itself does not validate, so
    the field and its derivatives stay usable for arbitrary values.
    """

    theta: float
    gamma: float
    delta: float
    M: float = 0.0
    N: float = 0.0
    S: float = 0.0
    P: float = 0.0

    @property
    def D(self) -> float:
        """theta - gamma*delta, the determinant-like quantity that must not vanish."""
        return self.theta - self.gamma * self.delta

    def validate(self) -> "Coefficients":
        if not self.gamma < 0:
            raise DegenerateCoefficientsError(f"gamma = {self.gamma:g} must be negative")
        if self.theta * self.delta == 0:
            raise DegenerateCoefficientsError("theta * delta = 0 is out of scope")
        if self.D == 0:
            raise DegenerateCoefficientsError("theta - gamma*delta = 0 is out of scope")
        return self

    def quadratic_part(self) -> "Coefficients":
        """Same (theta, gamma, delta) with the cubic terms M, N, S, P dropped."""
        return replace(self, M=0.0, N=0.0, S=0.0, P=0.0)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


class Orientation(enum.Enum):
    """Time direction of the canonical frame relative to the raw one."""

    FORWARD = 1  # p12 < 0 < p22, t = 2*tau
    REVERSED = -1  # p22 < 0 < p12, t = -2*tau, mu and M, N, S, P negated

    @property
    def time_factor(self) -> float:
        """dt/dtau."""
        return 2.0 * self.value

    def map_mu(self, mu: ParamPoint) -> ParamPoint:
        return ParamPoint(self.value * mu.mu1, self.value * mu.mu2)


@dataclass(frozen=True)
class RawCoefficients:
    mu: ParamPoint
    p11: float
    p12: float
    p13: float
    p21: float
    p22: float
    p23: float
    s1: float
    s2: float

    def __post_init__(self):
        if self.p12 * self.p22 == 0:
            raise SignCaseError("p12 * p22 = 0 is out of scope")


def canonicalize(raw: RawCoefficients) -> tuple[Coefficients, Orientation]:
    prod = raw.p12 * raw.p22
    if prod >= 0:
        raise SignCaseError(
            f"p12 * p22 = {prod:g} >= 0: case 2 (positive product) is out of scope"
        )
    orientation = Orientation.FORWARD if raw.p12 < 0 else Orientation.REVERSED
    sign = orientation.value
    c = Coefficients(
        theta=raw.p11 / raw.p12,
        gamma=raw.p12 / raw.p22,
        delta=raw.p21 / raw.p12,
        M=sign * raw.p13 / (raw.p12 * raw.p22),
        N=sign * raw.s1 / raw.p12**2,
        S=sign * raw.p23 / raw.p12**2,
        P=sign * raw.s2 / raw.p22**2,
    )
    return c, orientation


def canonical_state(raw: RawCoefficients, x, y):
    """Map raw first-quadrant coordinates (x, y) to (xi1, xi2).

    Both orientations scale by the absolute values, so Q1 maps onto Q1.
    """
    return abs(raw.p12) * np.asarray(x, dtype=float), abs(raw.p22) * np.asarray(y, dtype=float)


def raw_vector_field(raw: RawCoefficients, x, y):
    """(dx/dtau, dy/dtau) of the raw system."""
    mu1, mu2 = raw.mu
    dx = 2 * x * (mu1 + raw.p11 * x + raw.p12 * y + raw.p13 * x * y + raw.s1 * x**2)
    dy = 2 * y * (mu2 + raw.p21 * x + raw.p22 * y + raw.p23 * x**2 + raw.s2 * y**2)
    return dx, dy


def growth_rates(c: Coefficients, mu1, mu2, x1, x2):
    """The per-capita rates (g1, g2); the field is (x1*g1, x2*g2)."""
    g1 = mu1 - c.theta * x1 + c.gamma * x2 - c.M * x1 * x2 + c.N * x1**2
    g2 = mu2 - c.delta * x1 + x2 + c.S * x1**2 + c.P * x2**2
    return g1, g2


def vector_field(c: Coefficients, mu: ParamPoint, s) -> tuple[float, float]:
    x1, x2 = s
    g1, g2 = growth_rates(c, mu.mu1, mu.mu2, x1, x2)
    return x1 * g1, x2 * g2


def jacobian(c: Coefficients, mu: ParamPoint, s) -> np.ndarray:
    x1, x2 = s
    g1, g2 = growth_rates(c, mu.mu1, mu.mu2, x1, x2)
    return np.array(
        [
            [g1 + x1 * (-c.theta - c.M * x2 + 2 * c.N * x1), x1 * (c.gamma - c.M * x1)],
            [x2 * (-c.delta + 2 * c.S * x1), g2 + x2 * (1 + 2 * c.P * x2)],
        ]
    )


def hessian(c: Coefficients, s) -> np.ndarray:
    """Second derivatives, H[i, j, k] = d^2 f_i / dxi_j dxi_k (independent of mu)."""
    x1, x2 = s
    h = np.zeros((2, 2, 2))
    h[0, 0, 0] = -2 * c.theta - 2 * c.M * x2 + 6 * c.N * x1
    h[0, 0, 1] = h[0, 1, 0] = c.gamma - 2 * c.M * x1
    h[1, 0, 0] = 2 * c.S * x2
    h[1, 0, 1] = h[1, 1, 0] = -c.delta + 2 * c.S * x1
    h[1, 1, 1] = 2 + 6 * c.P * x2
    return h


def third_derivative(c: Coefficients) -> np.ndarray:
    """T[i, j, k, l] = d^3 f_i / dxi_j dxi_k dxi_l; constant since f is cubic."""
    t = np.zeros((2, 2, 2, 2))
    t[0, 0, 0, 0] = 6 * c.N
    for idx in ((0, 0, 1), (0, 1, 0), (1, 0, 0)):
        t[(0,) + idx] = -2 * c.M
        t[(1,) + idx] = 2 * c.S
    t[1, 1, 1, 1] = 6 * c.P
    return t
