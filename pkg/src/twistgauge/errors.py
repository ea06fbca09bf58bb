"""Exception hierarchy shared by all modules."""


class TwistGaugeError(Exception):
    """Base class for library errors."""


class ShapeMismatch(TwistGaugeError, ValueError):
    pass


class UnsupportedOrder(TwistGaugeError, ValueError):
    """Requested derivative order exceeds what the jet carrier supports."""


class DegreeOverflow(TwistGaugeError, ValueError):
    pass


class NotInGroup(TwistGaugeError, ValueError):
    pass


class LogDomainError(TwistGaugeError, ValueError):
    """Matrix logarithm requested outside the principal branch."""


class NonInvertible(TwistGaugeError, ValueError):
    pass


class StructureConstantError(TwistGaugeError):
    """Basis does not close under the commutator."""


class NotAHomomorphism(TwistGaugeError):
    pass


class CocycleViolation(TwistGaugeError):
    pass


class IncompatibleCocycle(TwistGaugeError, ValueError):
    pass


class DegenerateSoldering(TwistGaugeError):
    def __init__(self, message, points=()):
        super().__init__(message)
        self.points = list(points)


class DegenerateMetric(TwistGaugeError, ValueError):
    pass


class GradingError(TwistGaugeError, ValueError):
    pass


class DomainError(TwistGaugeError, ValueError):
    pass


class GroupMismatch(TwistGaugeError, ValueError):
    pass


class RepresentationMismatch(TwistGaugeError, ValueError):
    pass


class EmptyOverlap(TwistGaugeError, ValueError):
    pass


class BadPartition(TwistGaugeError, ValueError):
    """Partition-of-unity weights do not sum to one."""


class RepresentationNotUnitary(TwistGaugeError, ValueError):
    pass
