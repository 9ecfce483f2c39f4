"""Exception hierarchy shared by all modules."""


class HyperbolicError(Exception):
    """Base class for every domain error raised by hypsurf."""


class ParabolicElement(HyperbolicError):
    pass


class EllipticElement(HyperbolicError):
    pass


class IntersectingGeodesics(HyperbolicError):
    pass


class NotHyperbolicGenerator(HyperbolicError):
    pass


class AreaMismatch(HyperbolicError):
    pass


class DiscretenessSuspect(HyperbolicError):
    pass


class EnumerationBudgetExceeded(HyperbolicError):
    pass


class InconclusiveCutoff(HyperbolicError):
    pass


class DegenerateLength(HyperbolicError):
    pass


class OutsideCollar(HyperbolicError):
    pass


class OutOfRegime(HyperbolicError):
    pass


class ParameterOutOfRange(HyperbolicError):
    pass


class HypothesisViolated(HyperbolicError):
    pass


class MCBudget(HyperbolicError):
    pass


class DomainError(HyperbolicError):
    pass


class InsufficientThinPoints(HyperbolicError):
    pass


class InsufficientThickPoints(HyperbolicError):
    pass
