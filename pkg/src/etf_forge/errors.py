"""Exception hierarchy shared by all modules."""


class EtfForgeError(Exception):
    """Base class for every error raised by this package."""


class VarTableMismatch(EtfForgeError):
    pass


class BadRelationShape(EtfForgeError):
    pass


class UnassignedVariable(EtfForgeError, KeyError):
    pass


class ExponentOverflow(EtfForgeError, OverflowError):
    pass


class PolynomialSyntaxError(EtfForgeError, ValueError):
    pass


class ZeroPolynomial(EtfForgeError, ValueError):
    pass


class UnitIdeal(EtfForgeError):
    pass


class BudgetExceeded(EtfForgeError):
    """A computation ran out of its :class:`ComputeBudget`.

    ``stats`` holds whatever partial counters the computation had collected.
    """

    def __init__(self, message, **stats):
        super().__init__(message)
        self.stats = stats


class BadParams(EtfForgeError, ValueError):
    pass


class NonUnitColumns(EtfForgeError, ValueError):
    pass


class SizeMismatch(EtfForgeError, ValueError):
    pass


class NotAnEtf(EtfForgeError, ValueError):
    pass


class NEqualsM(EtfForgeError, ValueError):
    pass


class MTooSmall(EtfForgeError, ValueError):
    pass


class NotRankOne(EtfForgeError, ValueError):
    pass


class BadModulus(EtfForgeError, ValueError):
    pass


class BadSubgram(EtfForgeError, ValueError):
    pass


class BadSize(EtfForgeError, ValueError):
    pass


class NotUnimodular(EtfForgeError, ValueError):
    pass


class ZeroFirstRowEntry(EtfForgeError, ValueError):
    pass


class TooLarge(EtfForgeError, ValueError):
    pass


class NonMonomialDenominator(EtfForgeError, ValueError):
    pass


class AlphaIsRational(EtfForgeError, ValueError):
    pass


class ExtensionNotFound(EtfForgeError):
    pass


class SearchExhausted(EtfForgeError):
    pass


class BadScenario(EtfForgeError, ValueError):
    pass


class MalformedEntry(EtfForgeError, ValueError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class DimensionMismatch(EtfForgeError, ValueError):
    pass
