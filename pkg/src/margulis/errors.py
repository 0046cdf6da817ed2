"""Exception hierarchy."""


class MargulisError(Exception):
    """Base class for all errors raised by the package."""


class NotInIdentityComponent(MargulisError):
    pass


class NotHyperbolic(MargulisError):
    pass


class DegenerateTriple(MargulisError):
    pass


class ZeroImage(MargulisError):
    pass


class UnknownGenerator(MargulisError):
    pass


class FailedToSeparate(MargulisError):
    pass


class HyperbolizationFailed(MargulisError):
    pass


class NonElementaryViolated(MargulisError):
    pass


class NonHyperbolicWord(MargulisError):
    pass


class DegeneratePair(MargulisError):
    pass


class ParallelNoIntersect(MargulisError):
    pass


class StartAtRepeller(MargulisError):
    pass


class SharedLinearPartViolated(MargulisError):
    pass


class ElementaryGroup(MargulisError):
    pass


class NotParallel(MargulisError):
    pass


class RadiantInput(MargulisError):
    pass


class ElementaryInput(MargulisError):
    pass


class MalformedGroupFile(MargulisError):
    pass
