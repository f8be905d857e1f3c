"""Exception types shared across the toolkit."""


class InvexkitError(Exception):
    """Base class for every toolkit error."""


class ChartMismatch(InvexkitError):
    """Two geometric objects live on different chart models."""


class TangencyViolation(InvexkitError):
    """A vector fails the tangency invariant of its base point."""


class OutOfChart(InvexkitError):
    """A point leaves the region covered by its chart model."""


class NumericalDrift(InvexkitError):
    """Floating-point drift off the embedded surface exceeds the repair bound."""


class NonDifferentiable(InvexkitError):
    """A scalar field has no gradient at the requested point."""


class EmptyNeighborhood(InvexkitError):
    """No probe landed inside the required neighborhood/domain intersection."""


class InfeasibleStart(InvexkitError):
    """A solver was started outside the feasible region."""


class PremiseFailure(InvexkitError):
    """A theorem harness was invoked with a premise that does not hold.

    ``premise`` names the failed premise so callers can report it distinctly.
    """

    def __init__(self, premise: str, message: str = ""):
        self.premise = premise
        super().__init__(message or premise)


class ConfigError(InvexkitError):
    """A scenario file or descriptor is malformed.

    ``where`` is a dotted path into the offending document, e.g.
    ``checks[2].args.field``.
    """

    def __init__(self, message: str, where: str = ""):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)
