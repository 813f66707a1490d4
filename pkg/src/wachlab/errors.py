"""Exception hierarchy shared by every wachlab module."""


class WachlabError(Exception):
    """Base class for all library errors."""


class ParameterError(WachlabError, ValueError):
    """Operands live in different rings, or ring parameters are invalid."""


class NotAUnit(WachlabError, ArithmeticError):
    pass


class InvalidCharacterValue(WachlabError, ValueError):
    """A cyclotomic character value that is not a p-adic unit."""


class NotInSpan(WachlabError):
    """Target of a membership problem is not in the span of the columns.

    ``position`` is ``(row, degree)`` of the first nonzero coefficient of the
    residual left after the best partial solve; ``residual`` is that
    coefficient.
    """

    def __init__(self, position, residual, message=None):
        self.position = position
        self.residual = residual
        super().__init__(message or f"not in span: obstruction at row={position[0]} "
                                    f"degree={position[1]} residual={residual}")


class PrecisionError(WachlabError):
    """The requested quantity is not determined at the available precision."""


class NotUnipotentModX(WachlabError, ValueError):
    pass


class NotUnipotent(WachlabError, ValueError):
    pass


class UnsupportedEigenstructure(WachlabError, ValueError):
    """Frobenius has eigenvalues outside Q."""


class InvariantError(WachlabError, ValueError):
    """A structural invariant of a value failed; ``invariant`` names it."""

    def __init__(self, invariant, message=None):
        self.invariant = invariant
        super().__init__(message or f"invariant violated: {invariant}")


class FormatError(WachlabError, ValueError):
    def __init__(self, line, column, message):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")
