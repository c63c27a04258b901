"""Exception hierarchy shared by all qes2 modules."""


class QESError(ValueError):
    """Base class for parameter and domain errors raised by qes2."""


class InvalidParameterError(QESError):
    pass


class AmbiguousBranchError(QESError):
    """m lies within the guard band of a branch point (m = -1 or m = 1)."""


class DomainError(QESError):
    pass


class ChartDomainError(DomainError):
    """Evaluation point lies outside the open chart (x1, x2)."""


class NoPositiveRootError(QESError):
    pass


class UnsupportedAsymptoticBranchError(QESError):
    pass


class NotApplicableError(QESError):
    pass


class NoRootsError(QESError):
    pass


class DoubleRootError(QESError):
    pass


class InadmissibleError(QESError):
    """Raised when a sphere solution is requested for inadmissible parameters."""

    def __init__(self, verdict):
        self.verdict = verdict
        super().__init__(f"parameters not admissible: {verdict.reason.value}")
