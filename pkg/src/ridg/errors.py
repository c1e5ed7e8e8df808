"""Exception hierarchy shared across the package."""


class RIDGError(Exception):
    """Base class for all package errors."""


class DomainError(RIDGError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class AssemblyError(RIDGError):
    """A predictor or region matrix turned out to be singular."""


class BracketError(RIDGError):
    """The stability bisection bracket does not straddle the threshold."""

    def __init__(self, message, f_lo=None, f_hi=None):
        super().__init__(message)
        self.f_lo = f_lo
        self.f_hi = f_hi


class NewtonError(RIDGError):
    """A region Jacobian solve failed inside the nonlinear predictor."""

    def __init__(self, message, element=None, iteration=None):
        super().__init__(message)
        self.element = element
        self.iteration = iteration


class ExactSolutionError(RIDGError):
    """The characteristic solve for the exact Burgers solution did not converge."""


class BlowUpError(RIDGError):
    """Solution coefficients grew beyond the blow-up threshold."""
