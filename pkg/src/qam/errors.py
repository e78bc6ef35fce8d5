"""Exception hierarchy for the qam package.

Domain errors (bad inputs) are distinct from certificate errors (a numerical
check that should have passed did not); the CLI maps the former to exit
status 2 and the latter to exit status 1.
"""

from __future__ import annotations


class QamError(Exception):
    """Base class for all qam errors."""


# Input / domain errors ------------------------------------------------------


class DomainError(QamError):
    """A value or object violates a precondition of the operation."""


class NonPositiveInterval(DomainError):
    """Power/log generators require a working interval with lo > 0."""


class OutOfDomain(DomainError):
    """Argument outside the generator's working interval."""


class OutOfRange(DomainError):
    """Target value outside the generator's value range (inversion)."""


class IntervalMismatch(DomainError):
    """Operation requires generators sharing the same working interval."""


class InvalidGenerator(DomainError):
    """Constructor invariant violated (non-monotone samples, zero slope, ...)."""


class DegenerateProbe(DomainError):
    """A ratio probe's denominator f(y) - f(z) is below the underflow guard."""


class DerivativeUnavailable(DomainError):
    """The generator representation carries no usable first derivative."""


class SecondDerivativeUnavailable(DomainError):
    """The generator representation carries no second derivative."""


class SlopeOrderViolation(DomainError):
    """Kink slope ordering contradicts the requested projection direction."""


class EmptyProjection(DomainError):
    """Both projection directions requested for a generator with kinks."""


# Computation / certificate errors -------------------------------------------


class CertificateError(QamError):
    """A certificate or cross-check that should hold numerically failed."""


class MethodsDisagree(CertificateError):
    """Two comparison methods returned contradictory directed verdicts."""


class EnvelopeOverflow(QamError):
    """exp of the inner integral left the floating-point range."""


class NoConvergence(QamError):
    """Partition refinement hit the depth cap before meeting refine_tol.

    Carries the best value reached so callers can still inspect it.
    """

    def __init__(self, message: str, best: float):
        super().__init__(message)
        self.best = best


class NoUpperBoundInCatalog(QamError):
    """No catalog member dominates the whole family (sup case)."""


class NoLowerBoundInCatalog(QamError):
    """No catalog member is dominated by the whole family (inf case)."""
