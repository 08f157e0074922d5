"""Exceptions raised by the exact-algebra and assembly layers."""


class LocalVertexError(Exception):
    """Base class for all engine errors."""


class AlphabetMismatch(LocalVertexError):
    """Two values over different variable alphabets were combined."""


class FixedWeightPresent(LocalVertexError):
    """A character passed to an Euler-class operator contains the trivial weight."""


class NonIntegralExponent(LocalVertexError):
    """An operation requiring integer exponents met a fractional one."""


class NonUnitConstantTerm(LocalVertexError):
    """Series inverse/sqrt requested on a series whose constant term is not invertible/1."""


class NonzeroConstantTerm(LocalVertexError):
    """Plethystic exponential of a series with nonzero constant term."""


class PoleAtOne(LocalVertexError):
    """A limit at 1 was requested for a function with a genuine pole there."""


class PoleOnLocus(LocalVertexError):
    """A restriction hit a pole on the target locus."""


class Divergent(LocalVertexError):
    """The large-parameter limit diverges."""


class NegativeBPower(LocalVertexError):
    """The b-expansion kept negative powers: wrong normalisation power."""


class InternalInvariantViolation(LocalVertexError):
    """A postcondition guaranteed by the underlying theory failed; indicates a bug."""


class MismatchBetweenDefinitions(LocalVertexError):
    """Two independent computations of the same quantity disagree."""


class TruncationTooShallow(LocalVertexError):
    """The requested truncation order cannot resolve the series."""


class UnknownForm(LocalVertexError):
    """closed_form was asked for a name it does not know."""


class CacheError(LocalVertexError):
    """Unrecoverable cache I/O failure."""
