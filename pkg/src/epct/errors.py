"""Exception hierarchy shared across the package."""

from __future__ import annotations


class EPCTError(Exception):
    """Base class for all package errors."""


class ValidationError(EPCTError, ValueError):
    """Raised when threshold constants violate one or more conditions.

    Attributes
    ----------
    violations : list of Violation
        Every violated inequality, not just the first one.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"{len(self.violations)} violated condition(s): {lines}")


class SearchFailed(EPCTError, RuntimeError):
    """No feasible parameter set was found within the iteration budget."""


class DegenerateLeading(EPCTError, ArithmeticError):
    """Leading coefficient of the flux quadratic is not positive."""


class EnvelopeViolation(EPCTError, ValueError):
    """A coefficient trajectory left its declared envelope."""


class NonzeroMean(EPCTError, ValueError):
    """A field passed to a Riesz multiplier does not have zero mean."""


class GridMismatch(EPCTError, ValueError):
    """Sampled histories do not share a common time grid."""


class CflViolation(EPCTError, ValueError):
    """Time step exceeds the advective CFL bound."""


class FlowAborted(EPCTError, RuntimeError):
    """The short-time flow solver left its verified window."""


class PreconditionError(EPCTError, ValueError):
    """Inputs do not satisfy the hypotheses of the requested experiment."""


class PositivityLost(EPCTError, ArithmeticError):
    """A quantity that must stay positive (density, ``a``) did not."""
