"""Exception hierarchy shared by every module."""


class SolidAngleError(Exception):
    """Base class for all errors raised by this package."""


class SingularBasis(SolidAngleError):
    pass


class RadiusTooLarge(SolidAngleError):
    pass


class NormalizationFailure(SolidAngleError):
    pass


class DegenerateTriangle(SolidAngleError):
    pass


class BranchMismatch(SolidAngleError):
    pass


class DomainError(SolidAngleError):
    pass


class CrossOracleMismatch(SolidAngleError):
    pass


class RejectionOverflow(SolidAngleError):
    pass


class EmptyDomain(SolidAngleError):
    pass


class InputFormatError(SolidAngleError):
    """Malformed basis text or Gram JSON."""
