"""Exception hierarchy.

Precondition failures derive from :class:`PreconditionError` (a ``ValueError``),
so callers and the CLI can map the whole family to one exit status.
"""

from __future__ import annotations


class HamsimError(Exception):
    """Base class for all package errors."""


class PreconditionError(HamsimError, ValueError):
    """An input violates a documented precondition."""


class NonHermitian(PreconditionError):
    pass


class NonSquare(PreconditionError):
    pass


class NotUnitary(PreconditionError):
    pass


class DimensionTooLarge(PreconditionError):
    pass


class ResultTooLarge(PreconditionError):
    pass


class DimensionMismatch(PreconditionError):
    pass


class BadCharacter(PreconditionError):
    pass


class LengthMismatch(PreconditionError):
    pass


class ParseError(PreconditionError):
    pass


class NormViolation(PreconditionError):
    pass


class QubitCountMismatch(PreconditionError):
    pass


class EmptyList(PreconditionError):
    pass


class ZeroWeights(PreconditionError):
    pass


class BlockNotHermitian(PreconditionError):
    pass


class EmptySeries(PreconditionError):
    pass


class PolynomialTooLarge(PreconditionError):
    pass


class NormTooLarge(PreconditionError):
    pass


class EpsilonOutOfRange(PreconditionError):
    pass


class ArgumentOutOfRange(PreconditionError):
    pass


class KTooSmall(PreconditionError):
    pass


class OrderUnsupported(PreconditionError):
    pass


class TooManyTerms(PreconditionError):
    pass


class EmptyTable(PreconditionError):
    pass


class NoConvergence(HamsimError, RuntimeError):
    """An iterative routine hit its iteration cap."""
