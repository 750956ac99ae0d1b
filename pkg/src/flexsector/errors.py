"""Exception hierarchy shared by the library and the CLI."""


class FlexSectorError(Exception):
    """Base class for all library errors."""


class DomainError(FlexSectorError, ValueError):
    """Invalid argument or inconsistent configuration."""


class InfeasibleError(FlexSectorError):
    """The requested instance admits no feasible solution.

    ``deficit`` carries how far the instance is from feasibility when it is
    meaningful (e.g. antennas missing from the budget).
    """

    def __init__(self, message, deficit=None):
        super().__init__(message)
        self.deficit = deficit


class NumericalError(FlexSectorError, ArithmeticError):
    """A numerical routine failed to converge or hit a degenerate case."""


class SingularChannelError(NumericalError):
    """Channel Gram matrix is numerically rank deficient; redraw the channel."""
