"""Exception hierarchy shared by every module of the toolkit."""


class BVError(Exception):
    """Base class for toolkit errors."""


class DomainError(BVError, ValueError):
    pass


class UnknownName(BVError, KeyError):
    pass


class BadParameter(BVError, ValueError):
    pass


class UnsupportedRep(BVError, TypeError):
    """The operation needs structure the given representation does not carry."""


class PartitionMismatch(BVError, ValueError):
    pass


class NotBV(BVError):
    """The function has (certified or structurally known) unbounded variation."""


class QuadratureFailure(BVError, ArithmeticError):
    pass


class DiscontinuousInput(BVError, ValueError):
    pass


class DiscontinuousIntegrand(DiscontinuousInput):
    pass


class DegenerateGrid(BVError, ValueError):
    pass


class EmptyCandidates(BVError, ValueError):
    pass


class BoundViolated(BVError, ValueError):
    pass


class ConfigError(BVError, ValueError):
    pass
