"""Exception types raised across the package."""


class BCSError(Exception):
    """Base class for all errors raised by :mod:`bcs`."""


class RankDeficient(BCSError, ValueError):
    pass


class ConvergenceFailure(BCSError, RuntimeError):
    pass


class ZeroColumn(BCSError, ValueError):
    pass


class NotOrthogonalBlock(BCSError, ValueError):
    pass


class DimensionMismatch(BCSError, ValueError):
    pass


class NotPowerOfTwo(BCSError, ValueError):
    pass


class BadFilter(BCSError, ValueError):
    pass


class NoCandidate(BCSError, RuntimeError):
    """Every basis in a catalog failed to produce a sparse solution."""


class BlockOrthogonalityLost(BCSError, RuntimeError):
    pass


class DivisibilityError(BCSError, ValueError):
    pass


class ZeroSignal(BCSError, ValueError):
    pass


class ConfigInvalid(BCSError, ValueError):
    pass


class ParseError(BCSError, ValueError):
    """Malformed matrix file; ``line`` is 1-based."""

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


class SingularSupportWarning(UserWarning):
    """OMP re-fit hit a rank-deficient support; a minimum-norm solution was used."""
