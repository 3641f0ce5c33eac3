"""Exception hierarchy.

Every violated precondition raises a subclass of :class:`PreconditionError`;
the CLI maps those to exit status 2.
"""


class OsposError(Exception):
    """Base class for all toolkit errors."""


class PreconditionError(OsposError, ValueError):
    """An input does not satisfy the premises of the requested operation."""


class NotHermitian(PreconditionError):
    pass


class DimensionMismatch(PreconditionError):
    pass


class NoConvergence(OsposError, ArithmeticError):
    pass


class NotOsPositive(PreconditionError):
    pass


class DomainNotInFixedSpace(PreconditionError):
    pass


class NotPositive(PreconditionError):
    pass


class NotAGraph(PreconditionError):
    pass


class NotMaximal(PreconditionError):
    pass


class NotAFactorization(PreconditionError):
    pass


class NotUnitary(PreconditionError):
    pass


class NotInvariant(PreconditionError):
    pass


class NotReflectionSymmetric(PreconditionError):
    pass


class NotSkewAdjoint(PreconditionError):
    pass


class NonPositiveSpectrum(PreconditionError):
    pass


class SemigroupLawViolation(OsposError, ArithmeticError):
    pass


class PreconditionFailed(PreconditionError):
    pass


class InvalidPartition(PreconditionError):
    pass


class NotContraction(PreconditionError):
    pass


class NegativeTime(PreconditionError):
    pass


class GridTooSmall(PreconditionError):
    pass


class InvalidS(PreconditionError):
    pass


class QuadratureFailure(OsposError, ArithmeticError):
    pass


class InvalidScale(PreconditionError):
    pass


class RankDeficient(PreconditionError):
    pass


class ParseError(PreconditionError):
    pass


class SchemaError(PreconditionError):
    pass
