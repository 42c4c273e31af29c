"""Exception hierarchy. Every domain failure derives from ``ControlError``."""


class ControlError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class DimensionMismatch(ControlError, ValueError):
    pass


class InvalidAlternative(ControlError, IndexError):
    pass


class SearchBudgetExceeded(ControlError):
    pass


class BudgetExceeded(ControlError):
    pass


class Infeasible(ControlError):
    pass


class NotATargetSet(ControlError):
    pass


class FanInTooLarge(ControlError):
    pass


class NotAFixedPoint(ControlError):
    pass


class MixedSignNode(ControlError):
    pass


class NoCanalyzingRank(ControlError):
    pass


class InvalidAttractor(ControlError):
    pass


class AttractorNotCommonFixedPoint(ControlError):
    pass


class NotACliqueInstance(ControlError):
    pass


class NotACliquePartition(ControlError):
    pass


class NotATree(ControlError):
    pass


class NotHierarchical(ControlError):
    pass


class TooLarge(ControlError):
    pass


class NoFixedPoint(ControlError):
    pass


class ParseError(ControlError):
    """Raised by the text readers; carries a 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class PinMismatch(ControlError, ValueError):
    pass
