"""Exception types raised by pertrk."""


class PertRKError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(PertRKError, ValueError):
    pass


class StructureViolation(PertRKError, ValueError):
    pass


class SingularResolvent(PertRKError, ArithmeticError):
    pass


class PreconditionViolation(PertRKError, ValueError):
    pass


class ZeroRadius(PertRKError, ValueError):
    pass


class IterationCap(PertRKError, RuntimeError):
    pass


class UnsupportedClass(PertRKError, ValueError):
    pass


class DomainError(PertRKError, ValueError):
    pass


class UnknownMethod(PertRKError, KeyError):
    pass


class LPNumericalFailure(PertRKError, RuntimeError):
    pass
