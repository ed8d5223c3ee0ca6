"""Exception types shared across the solver."""


class ActiveFluxError(Exception):
    """Base class for solver errors."""


class NonPositiveDensity(ActiveFluxError):
    pass


class NonPositivePressure(ActiveFluxError):
    pass


class InconsistentPeriodicity(ActiveFluxError):
    pass


class OutOfDomain(ActiveFluxError):
    pass


class QuadratureDegenerate(ActiveFluxError):
    pass


class FatalInadmissible(ActiveFluxError):
    """Even the Lax-Friedrichs fallback produced an inadmissible point value."""


class InadmissibleAverage(ActiveFluxError):
    """A cell average with non-positive density or pressure after the FV update."""


class GridMismatch(ActiveFluxError):
    pass


class UnknownProblem(ActiveFluxError, ValueError):
    """Unknown problem name; also a ValueError so CLIs treat it as config."""
