"""Exception hierarchy shared by every module of the package."""


class LagQuantError(Exception):
    """Base class for all errors raised by lagquant."""


class ParseError(LagQuantError, ValueError):
    pass


class IncompatibleVariables(LagQuantError, ValueError):
    pass


class UnknownVariable(LagQuantError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class NotClosed(LagQuantError, ValueError):
    pass


class NonNilpotentConstantTerm(LagQuantError, ValueError):
    pass


class NonInvertibleImage(LagQuantError, ValueError):
    pass


class RankMismatch(LagQuantError, ValueError):
    pass


class ValidityExhausted(LagQuantError, ArithmeticError):
    pass


class NotSymplectic(LagQuantError, ValueError):
    pass


class ZeroElement(LagQuantError, ValueError):
    pass


class IllDefinedAction(LagQuantError, ValueError):
    pass


class NotParabolic(LagQuantError, ValueError):
    pass


class NotIntegrable(LagQuantError, ValueError):
    pass


class ChartMismatch(LagQuantError, ValueError):
    pass


class NoSolution(LagQuantError, ValueError):
    pass


class NotCocycle(LagQuantError, ValueError):
    pass


class NotAClass(LagQuantError, ValueError):
    pass


class NotLagrangian(LagQuantError, ValueError):
    pass


class NotWeylNormalized(LagQuantError, ValueError):
    pass


class GluingDefect(LagQuantError, ValueError):
    pass


class NoPrimitive(LagQuantError, ValueError):
    pass


class MissingData(LagQuantError, ValueError):
    pass


class InvalidScenario(LagQuantError, ValueError):
    """Scenario failed validation; ``diagnostics`` maps field paths to messages."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
