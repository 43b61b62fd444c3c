"""Exception hierarchy.

Out-of-scope coefficient regimes carry the process exit code the CLI uses
for them, so callers never need a lookup table.
"""

from __future__ import annotations


class KolbifError(Exception):
    """Base class for every error raised by this package."""


class OutOfScopeError(KolbifError):
    exit_code = 1


class SignCaseError(OutOfScopeError):
    """p12 * p22 >= 0: the zero-product or positive-product regime."""

    exit_code = 2


class DegenerateCoefficientsError(OutOfScopeError):
    """theta * delta == 0, theta - gamma*delta == 0, or gamma >= 0."""

    exit_code = 3


class UnsupportedCaseError(OutOfScopeError):
    """a == 0 together with d == 0; the cubic term does not decide q."""

    exit_code = 4


class EquilibriumError(KolbifError):
    """An equilibrium could not be located (nonexistent or indeterminate)."""


class PreconditionError(KolbifError):
    pass


class DegenerateHopfError(KolbifError):
    """First Lyapunov coefficient indistinguishable from zero."""


class NoCycleFound(KolbifError):
    pass


class IntegrationError(KolbifError):
    pass


class NonGenericError(KolbifError):
    """Two bifurcation curves leave the origin in the same direction."""
