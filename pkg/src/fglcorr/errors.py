"""Exception hierarchy shared by all engine modules."""

from __future__ import annotations


class EngineError(Exception):
    """Base class for every error raised by the engine."""


class RingMismatch(EngineError):
    """Operands belong to different coefficient rings."""


class DegreeMismatch(EngineError):
    """Sum of homogeneous elements with unequal degrees."""


class NotPIntegral(EngineError):
    """Rational number with a denominator divisible by p.

    Carries the (negative) p-adic valuation of the offending value.
    """

    def __init__(self, message: str, valuation: int):
        super().__init__(message)
        self.valuation = valuation


class ContextMismatch(EngineError):
    """Series operands live over incompatible variable contexts."""


class NonzeroConstantTerm(EngineError):
    """A substituted or decomposed series has a nonzero constant term."""


class NonUnitLinearTerm(EngineError):
    """Compositional inversion of a series whose linear coefficient is not a unit."""


class OutOfTruncation(EngineError):
    """Requested a coefficient beyond the truncation order."""


class BoundExceeded(EngineError):
    """Requested truncation exceeds the degree bound of a formal group law."""


class IntegralityFailure(EngineError):
    """A coefficient produced by the p-typical logarithm was not p-integral."""


class GradingFailure(EngineError):
    """A nonzero coefficient appeared in a degree forbidden by the grading."""


class InvalidComplex(EngineError):
    """Face data that is not an abstract simplicial complex."""


class TruncationTooSmall(EngineError):
    """Correction machinery needs truncation order at least 2."""


class NotDecorated(EngineError):
    """Operation requires a presentation with the cotangent variables S, T."""


class SchemaError(EngineError):
    """Malformed input document."""


class SingularPairing(EngineError):
    """Pairing matrix is not invertible over the coefficient ring."""


class UnitAxiomViolation(EngineError):
    """Area-zero correlator does not act as the identity on the unit."""


class UnorderedBubbles(EngineError):
    """Bubble divisor list not sorted by non-increasing area."""


class CutoffNonpositive(EngineError):
    """Novikov area cutoff must be positive."""


class TableArityMismatch(EngineError):
    """Evaluation-table monomial length disagrees with the bubble count."""
