"""Exception types shared across the package."""


class PerfTowerError(Exception):
    """Base class for every error raised by perftower."""


class ComplexNotComposable(PerfTowerError):
    pass


class NotAComplex(PerfTowerError):
    pass


class VariableMismatch(PerfTowerError):
    pass


class SpecMismatch(PerfTowerError):
    pass


class NoPillar(PerfTowerError):
    pass


class EmptyComplex(PerfTowerError):
    pass


class NotAFace(PerfTowerError):
    pass


class UnitIdeal(PerfTowerError):
    pass


class NotPurelyInseparable(PerfTowerError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DepthExceedsLevels(PerfTowerError):
    pass


class WindowTooSmall(PerfTowerError):
    pass


class WindowUnstable(PerfTowerError):
    def __init__(self, message, first=None, second=None):
        super().__init__(message)
        self.first = first
        self.second = second


class NotGraded(PerfTowerError):
    pass


class NotReduced(PerfTowerError):
    pass


class MapNotDefined(PerfTowerError):
    pass


class ParseError(PerfTowerError):
    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}, column {column})"
        super().__init__(message + loc)
        self.line = line
        self.column = column
