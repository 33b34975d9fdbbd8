"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ScreenEOQError(Exception):
    """Base class for all package errors."""


class DomainError(ScreenEOQError, ValueError):
    """An argument lies outside the domain of the operation."""


class ScenarioError(ScreenEOQError, ValueError):
    """A scenario violates one or more model assumptions.

    ``diagnostics`` holds every violation found, not only the first.
    """

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class InfeasibleError(ScreenEOQError, ValueError):
    """A policy or defect realization does not admit a valid cycle."""


class ShortageDuringScreeningError(InfeasibleError):
    """Good output of the slowest screen, (1 - rho) x_n, does not exceed demand."""


class BackorderCapacityError(InfeasibleError):
    """The backorder level is too large to be cleared before stock runs out (t4 < 0)."""


class NoFiniteOptimumError(ScreenEOQError, ArithmeticError):
    """The lot-size denominator is non-positive, so profit grows without bound in y."""


class UnsupportedError(ScreenEOQError, ValueError):
    """A specialised formula was called on a scenario it does not cover."""


class EstimationError(ScreenEOQError, RuntimeError):
    """Monte Carlo estimation could not produce an estimate."""
