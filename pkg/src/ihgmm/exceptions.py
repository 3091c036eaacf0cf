"""Exception types raised across the package."""


class IhgmmError(Exception):
    """Base class for all package errors."""


class ValidationError(IhgmmError, ValueError):
    """Invalid configuration or arguments."""


class RankDeficient(IhgmmError, ArithmeticError):
    pass


class NotSymmetric(IhgmmError, ValueError):
    pass


class ConvergenceFailure(IhgmmError, ArithmeticError):
    pass


class DegenerateCenters(IhgmmError, ValueError):
    """Centers coincide or do not span K dimensions."""


class Infeasible(IhgmmError, ValueError):
    pass


class LengthMismatch(IhgmmError, ValueError):
    pass


class EmptyInput(IhgmmError, ValueError):
    pass


class ParseError(IhgmmError, ValueError):
    """Malformed CSV content; ``row`` and ``col`` are 1-based file coordinates."""

    def __init__(self, message, row=None, col=None):
        loc = ""
        if row is not None:
            loc = f" (row {row}" + (f", column {col})" if col is not None else ")")
        super().__init__(message + loc)
        self.row = row
        self.col = col


class MissingValue(ParseError):
    def __init__(self, row, col):
        super().__init__("missing value", row=row, col=col)


class EmptyDataset(ParseError):
    def __init__(self, message="CSV has a header but no data rows"):
        super().__init__(message)


class LabelCardinalityMismatch(IhgmmError, ValueError):
    pass
