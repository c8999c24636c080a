"""Exception and warning classes raised by matdist."""


class MatdistError(Exception):
    """Base class for all matdist errors."""


class SourceTargetMismatch(MatdistError):
    """Two jets are not composable: the source of one is not the target of the other."""


class SourceMismatch(MatdistError):
    """A jet handed to an assembly routine does not have the expected source point."""


class SingularJet(MatdistError):
    """A matrix block of a jet is numerically singular."""


class ParseError(MatdistError):
    def __init__(self, message, line=None, column=None, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        where = f" at line {line}, column {column}" if line is not None else ""
        tail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message}{where}{tail}")


class IndexOutOfRange(ParseError):
    """A variable subscript lies outside 1..n."""


class DomainError(MatdistError):
    """A law was evaluated outside the domain of one of its functions."""

    def __init__(self, message, subexpression=None):
        self.subexpression = subexpression
        if subexpression is not None:
            message = f"{message} in subexpression `{subexpression}`"
        super().__init__(message)


class UnknownLaw(MatdistError):
    pass


class DimensionMismatch(MatdistError):
    pass


class NotAdmissible(MatdistError):
    """A coefficient vector does not solve the material equation at its point."""


class FlowLeftGrid(MatdistError):
    pass


class ConfigError(MatdistError):
    """Invalid run configuration. `key` names the offending config entry."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class RankNotSaturated(UserWarning):
    """Sampling stopped before the assembled system's rank stabilised."""


class SingularPointsPresent(UserWarning):
    """The base distribution changes dimension between neighbouring grid points."""

    def __init__(self, message, points=()):
        self.points = list(points)
        super().__init__(message)
